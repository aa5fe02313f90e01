use serde::Serialize;

use super::config::Format;
use super::CliError;

/// 17 significant digits: enough for every f64 to re-parse exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// A row type with a fixed CSV layout.
pub trait CsvRow {
    const HEADER: &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransientRow {
    pub gamma: f64,
    pub kappa: f64,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub input_flux: f64,
    pub t: f64,
    #[serde(rename = "I0_LR")]
    pub i0_lr: f64,
    #[serde(rename = "I0_RL")]
    pub i0_rl: f64,
    #[serde(rename = "In_LR")]
    pub in_lr: f64,
    #[serde(rename = "In_RL")]
    pub in_rl: f64,
    #[serde(rename = "delta_I")]
    pub delta_i: f64,
    #[serde(rename = "I0_LL")]
    pub i0_ll: f64,
    #[serde(rename = "I0_RR")]
    pub i0_rr: f64,
    #[serde(rename = "In_LL")]
    pub in_ll: f64,
    #[serde(rename = "In_RR")]
    pub in_rr: f64,
    pub phase: &'static str,
}

impl CsvRow for TransientRow {
    const HEADER: &'static [&'static str] = &[
        "t", "I0_LR", "I0_RL", "In_LR", "In_RL", "delta_I", "I0_LL", "I0_RR", "In_LL", "In_RR", "phase",
    ];

    fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = [
            self.t,
            self.i0_lr,
            self.i0_rl,
            self.in_lr,
            self.in_rl,
            self.delta_i,
            self.i0_ll,
            self.i0_rr,
            self.in_ll,
            self.in_rr,
        ]
        .iter()
        .map(|x| format_float(*x))
        .collect();
        r.push(self.phase.to_string());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyRow {
    #[serde(rename = "J")]
    pub coupling: f64,
    pub gamma: f64,
    #[serde(rename = "gamma_G")]
    pub gamma_g: f64,
    pub kappa: f64,
    pub n_th: f64,
    pub input_flux: f64,
    #[serde(rename = "I0")]
    pub i0: Option<f64>,
    #[serde(rename = "In_LR")]
    pub in_lr: Option<f64>,
    #[serde(rename = "In_RL")]
    pub in_rl: Option<f64>,
    #[serde(rename = "delta_I")]
    pub delta_i: Option<f64>,
    pub rel_nonrec: Option<f64>,
    pub stable: &'static str,
}

impl CsvRow for SteadyRow {
    const HEADER: &'static [&'static str] = &[
        "J", "gamma", "gamma_G", "kappa", "n_th", "I0", "In_LR", "In_RL", "delta_I", "rel_nonrec", "stable",
    ];

    fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = [self.coupling, self.gamma, self.gamma_g, self.kappa, self.n_th]
            .iter()
            .map(|x| format_float(*x))
            .collect();
        r.extend([self.i0, self.in_lr, self.in_rl, self.delta_i, self.rel_nonrec].map(opt));
        r.push(self.stable.to_string());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveguideRow {
    pub gamma: f64,
    #[serde(rename = "J")]
    pub coupling: f64,
    #[serde(rename = "Jl")]
    pub jl: f64,
    #[serde(rename = "I0_AB")]
    pub i0_ab: f64,
    #[serde(rename = "I0_AA")]
    pub i0_aa: f64,
    #[serde(rename = "I0_BB")]
    pub i0_bb: f64,
    #[serde(rename = "In_A")]
    pub in_a: f64,
    #[serde(rename = "In_B")]
    pub in_b: f64,
    #[serde(rename = "delta_I")]
    pub delta_i: f64,
    #[serde(rename = "delta_I_r0")]
    pub delta_i_r0: f64,
    #[serde(rename = "delta_I_r")]
    pub delta_i_r: f64,
    pub phase: &'static str,
}

impl CsvRow for WaveguideRow {
    const HEADER: &'static [&'static str] = &[
        "Jl", "I0_AB", "I0_AA", "I0_BB", "In_A", "In_B", "delta_I", "delta_I_r0", "delta_I_r", "phase",
    ];

    fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = [
            self.jl,
            self.i0_ab,
            self.i0_aa,
            self.i0_bb,
            self.in_a,
            self.in_b,
            self.delta_i,
            self.delta_i_r0,
            self.delta_i_r,
        ]
        .iter()
        .map(|x| format_float(*x))
        .collect();
        r.push(self.phase.to_string());
        r
    }
}

/// Rows of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum SweepTable {
    Transient(Vec<TransientRow>),
    Steady(Vec<SteadyRow>),
    Waveguide(Vec<WaveguideRow>),
}

fn write_csv<R: CsvRow>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(R::HEADER).map_err(CliError::csv)?;
    for row in rows {
        w.write_record(row.record()).map_err(CliError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

impl SweepTable {
    pub fn len(&self) -> usize {
        match self {
            SweepTable::Transient(r) => r.len(),
            SweepTable::Steady(r) => r.len(),
            SweepTable::Waveguide(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV omits the per-group parameter columns; rows appear grouped in
    /// grid order. JSON keeps them on every row.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => match self {
                SweepTable::Transient(r) => write_csv(r),
                SweepTable::Steady(r) => write_csv(r),
                SweepTable::Waveguide(r) => write_csv(r),
            },
            Format::Json => render_json(self),
        }
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
