use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Resonator,
    Waveguide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Transient,
    Steady,
    LengthSweep,
    Validate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Transient => "transient",
            Mode::Steady => "steady",
            Mode::LengthSweep => "length-sweep",
            Mode::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A grid axis: a single value, an explicit list, or `num` evenly spaced
/// points from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Value(f64),
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub num: usize,
}

impl Axis {
    pub fn list(values: &[f64]) -> Self {
        Axis::List(values.to_vec())
    }

    pub fn range(start: f64, stop: f64, num: usize) -> Self {
        Axis::Range(RangeSpec { start, stop, num })
    }

    /// Expanded values; a range with `num = 1` yields `start`.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Value(v) => vec![*v],
            Axis::List(v) => v.clone(),
            Axis::Range(r) => match r.num {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n)
                    .map(|k| {
                        if k == n - 1 {
                            r.stop
                        } else {
                            r.start + (r.stop - r.start) * k as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        }
    }
}

/// Parameter grid. Rates share one unit (J = 1 unless `unit_scale` says
/// otherwise); `t` and `l` are in the inverse unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub gamma: Option<Axis>,
    pub gamma_g: Option<Axis>,
    pub kappa: Option<Axis>,
    pub coupling: Option<Axis>,
    pub n_th: Option<Axis>,
    pub input_flux: Option<Axis>,
    pub t: Option<Axis>,
    pub l: Option<Axis>,
    #[serde(default)]
    pub thermal_input_ports: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    /// RK4 step for the moment equations.
    pub dt: f64,
    /// Trajectories per Monte Carlo estimate.
    pub n_traj: u64,
    pub seed: u64,
    /// Euler–Maruyama fine step.
    pub mc_dt: f64,
    /// Evolution coordinate at which Monte Carlo estimates are taken.
    pub mc_horizon: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_traj: 4000,
            seed: 42,
            mc_dt: 5e-3,
            mc_horizon: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSettings {
    /// Relative tolerance for closed form against the moment ODE, with an
    /// absolute floor of `ode_tolerance · 1e-2`.
    pub ode_tolerance: f64,
    /// Monte Carlo estimates pass within this many standard errors.
    pub mc_sigma: f64,
    pub monte_carlo: bool,
    /// Replace the antinormal diffusion with one missing the fiber vacuum
    /// term of resonator A; the commutator check must then fail.
    pub negative_control: bool,
    pub commutator_horizon: f64,
    pub commutator_tolerance: f64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self {
            ode_tolerance: 1e-6,
            mc_sigma: 3.0,
            monte_carlo: true,
            negative_control: false,
            commutator_horizon: 10.0,
            commutator_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// One JSON document describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub system: Option<SystemKind>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Value of J in the caller's units: rates are multiplied by it, times
    /// and lengths divided by it.
    #[serde(default = "unit")]
    pub unit_scale: f64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default)]
    pub validation: ValidationSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

fn unit() -> f64 {
    1.0
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            system: None,
            mode: None,
            unit_scale: 1.0,
            grid: Grid::default(),
            oracle: OracleSettings::default(),
            validation: ValidationSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

/// A rejected configuration, with the offending field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = if self.field.is_empty() || self.field == "." { "<root>" } else { &self.field };
        write!(f, "config error at {field}")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parses a JSON config, reporting the field path and position of the
/// first error, then applies the semantic checks of [`SweepConfig::check`].
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SweepConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        ConfigError {
            field: e.path().to_string(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    })?;
    config.check()?;
    Ok(config)
}

fn check_axis(name: &str, axis: &Option<Axis>, non_negative: bool) -> Result<(), ConfigError> {
    let Some(axis) = axis else { return Ok(()) };
    let field = format!("grid.{name}");
    if let Axis::Range(r) = axis {
        if r.num == 0 {
            return Err(ConfigError::invalid(format!("{field}.num"), "range needs num >= 1"));
        }
        if !(r.start.is_finite() && r.stop.is_finite()) {
            return Err(ConfigError::invalid(field, "range bounds must be finite"));
        }
    }
    let values = axis.values();
    if values.is_empty() {
        return Err(ConfigError::invalid(field, "axis must not be empty"));
    }
    for (k, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(ConfigError::invalid(format!("{field}[{k}]"), "value must be finite"));
        }
        if non_negative && *v < 0.0 {
            return Err(ConfigError::invalid(format!("{field}[{k}]"), format!("value must be >= 0, got {v}")));
        }
    }
    Ok(())
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(ConfigError::invalid(field, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

impl SweepConfig {
    /// Semantic checks beyond the JSON schema: non-empty finite axes,
    /// non-negative physical values and positive oracle settings.
    pub fn check(&self) -> Result<(), ConfigError> {
        positive("unit_scale", self.unit_scale)?;
        let g = &self.grid;
        check_axis("gamma", &g.gamma, true)?;
        check_axis("gamma_g", &g.gamma_g, true)?;
        check_axis("kappa", &g.kappa, true)?;
        check_axis("coupling", &g.coupling, true)?;
        check_axis("n_th", &g.n_th, true)?;
        check_axis("input_flux", &g.input_flux, true)?;
        check_axis("t", &g.t, true)?;
        check_axis("l", &g.l, true)?;
        positive("oracle.dt", self.oracle.dt)?;
        positive("oracle.mc_dt", self.oracle.mc_dt)?;
        if !(self.oracle.mc_horizon.is_finite() && self.oracle.mc_horizon >= 0.0) {
            return Err(ConfigError::invalid("oracle.mc_horizon", "must be finite and >= 0"));
        }
        if self.oracle.n_traj == 0 {
            return Err(ConfigError::invalid("oracle.n_traj", "must be at least 1"));
        }
        let v = &self.validation;
        if !(v.ode_tolerance.is_finite() && v.ode_tolerance >= 0.0) {
            return Err(ConfigError::invalid("validation.ode_tolerance", "must be finite and >= 0"));
        }
        if !(v.mc_sigma.is_finite() && v.mc_sigma >= 0.0) {
            return Err(ConfigError::invalid("validation.mc_sigma", "must be finite and >= 0"));
        }
        if !(v.commutator_tolerance.is_finite() && v.commutator_tolerance >= 0.0) {
            return Err(ConfigError::invalid("validation.commutator_tolerance", "must be finite and >= 0"));
        }
        positive("validation.commutator_horizon", v.commutator_horizon)?;
        if let (Some(SystemKind::Waveguide), Some(Mode::Transient | Mode::Steady)) = (self.system, self.mode) {
            return Err(ConfigError::invalid("mode", "waveguide runs support length-sweep or validate"));
        }
        if let (Some(SystemKind::Resonator), Some(Mode::LengthSweep)) = (self.system, self.mode) {
            return Err(ConfigError::invalid("mode", "length-sweep needs system = waveguide"));
        }
        Ok(())
    }

    /// Expanded axis or the given default.
    pub fn axis(&self, axis: &Option<Axis>, default: &[f64]) -> Vec<f64> {
        axis.as_ref().map(Axis::values).unwrap_or_else(|| default.to_vec())
    }
}
