use serde::Serialize;

use super::kernels::{cos_kernel, sinc_kernel};
use super::resonator::noise_terms;
use super::{q_of, AnalyticError};
use crate::model::{classify_phase, Phase, WaveguideParams, DEFAULT_EP_WINDOW};

/// Output intensities at z = l. `I0_XY` is the noise-free intensity in
/// waveguide Y for a photon launched into X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveguideReport {
    pub l: f64,
    #[serde(rename = "I0_AB")]
    pub i0_ab: f64,
    #[serde(rename = "I0_BA")]
    pub i0_ba: f64,
    #[serde(rename = "I0_AA")]
    pub i0_aa: f64,
    #[serde(rename = "I0_BB")]
    pub i0_bb: f64,
    #[serde(rename = "In_A")]
    pub in_a: f64,
    #[serde(rename = "In_B")]
    pub in_b: f64,
    /// In_A − In_B.
    pub delta_i: f64,
    /// I0_AA − I0_BB.
    pub delta_i_r0: f64,
    /// I_AA − I_BB including noise.
    pub delta_i_r: f64,
}

/// Closed-form outputs of PT-symmetric waveguides (γ_G = 2γ) at zero
/// temperature.
pub fn waveguide_outputs(params: &WaveguideParams) -> Result<WaveguideReport, AnalyticError> {
    params.validate()?;
    if !params.is_pt_symmetric() {
        return Err(AnalyticError::PreconditionViolation { condition: "gamma_G = 2 gamma" });
    }
    if params.n_th != 0.0 {
        return Err(AnalyticError::PreconditionViolation { condition: "n_th = 0" });
    }
    let (gamma, j, l) = (params.gamma, params.coupling, params.length);
    let q = q_of(gamma, j);
    let s = sinc_kernel(q, 0.5 * l);
    let c = cos_kernel(q, 0.5 * l);
    let i0_ab = 4.0 * j * j * s * s;
    let i0_aa = (c + gamma * s).powi(2);
    let i0_bb = (c - gamma * s).powi(2);
    let (in_b, in_a) = noise_terms(gamma, j, l);
    let delta_i = in_a - in_b;
    let delta_i_r0 = i0_aa - i0_bb;
    Ok(WaveguideReport {
        l,
        i0_ab,
        i0_ba: i0_ab,
        i0_aa,
        i0_bb,
        in_a,
        in_b,
        delta_i,
        delta_i_r0,
        delta_i_r: delta_i_r0 + delta_i,
    })
}

/// Relative distance |γ − 2J|/2J inside which the exceptional-point limits
/// replace the exponential asymptotics.
pub const ASYMPTOTIC_EP_WINDOW: f64 = 1e-6;

/// Large-l behaviour of the noise-free waveguide outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsymptoticForm {
    /// I0_XY ≈ prefactor · e^{exponent · l}.
    Broken {
        exponent: f64,
        prefactor_aa: f64,
        prefactor_bb: f64,
        prefactor_ab: f64,
        critical_length: f64,
    },
    /// Exact polynomial values at γ = 2J: (Jl+1)², (Jl)², (Jl−1)².
    ExceptionalPoint { coupling: f64 },
}

impl AsymptoticForm {
    /// (I0_AA, I0_AB, I0_BB) predicted at length `l`.
    pub fn evaluate(&self, l: f64) -> (f64, f64, f64) {
        match *self {
            AsymptoticForm::Broken {
                exponent,
                prefactor_aa,
                prefactor_bb,
                prefactor_ab,
                ..
            } => {
                let g = (exponent * l).exp();
                (prefactor_aa * g, prefactor_ab * g, prefactor_bb * g)
            }
            AsymptoticForm::ExceptionalPoint { coupling } => {
                let x = coupling * l;
                ((x + 1.0).powi(2), x * x, (x - 1.0).powi(2))
            }
        }
    }

    /// Length beyond which I0_AA > I0_AB > I0_BB.
    pub fn critical_length(&self) -> f64 {
        match *self {
            AsymptoticForm::Broken { critical_length, .. } => critical_length,
            AsymptoticForm::ExceptionalPoint { coupling } => 0.5 / coupling,
        }
    }

    pub fn ordering_holds(&self, l: f64) -> bool {
        l > self.critical_length()
    }
}

/// Record returned by [`waveguide_asymptotics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveguideAsymptotics {
    pub form: AsymptoticForm,
    /// Whether the ordering I0_AA > I0_AB > I0_BB holds at `params.length`.
    pub ordering_at_length: bool,
}

/// (2/λ)·atanh(√((γ − 2J)/(γ + 2J))) with λ = √(γ² − 4J²); tends to 1/(2J)
/// as γ → 2J.
pub fn critical_length(gamma: f64, coupling: f64) -> f64 {
    let lambda2 = -q_of(gamma, coupling);
    let lambda = lambda2.sqrt();
    let r = ((gamma - 2.0 * coupling) / (gamma + 2.0 * coupling)).sqrt();
    if r < 1e-4 {
        // atanh(r)/λ = (r/λ)(1 + r²/3 + r⁴/5 + …), r/λ = 1/(γ + 2J).
        let r2 = r * r;
        return 2.0 / (gamma + 2.0 * coupling) * (1.0 + r2 / 3.0 + r2 * r2 / 5.0);
    }
    2.0 / lambda * r.atanh()
}

/// Exponential asymptotics of the broken phase, or the exceptional-point
/// limit values when γ is within [`ASYMPTOTIC_EP_WINDOW`] of 2J.
pub fn waveguide_asymptotics(params: &WaveguideParams) -> Result<WaveguideAsymptotics, AnalyticError> {
    params.validate()?;
    if !params.is_pt_symmetric() {
        return Err(AnalyticError::PreconditionViolation { condition: "gamma_G = 2 gamma" });
    }
    let (gamma, j) = (params.gamma, params.coupling);
    let form = if (gamma - 2.0 * j).abs() <= ASYMPTOTIC_EP_WINDOW * 2.0 * j {
        AsymptoticForm::ExceptionalPoint { coupling: j }
    } else {
        let phase = classify_phase(params, DEFAULT_EP_WINDOW).phase;
        if phase != Phase::Broken {
            return Err(AnalyticError::PhaseError { phase });
        }
        let lambda2 = -q_of(gamma, j);
        let lambda = lambda2.sqrt();
        let base = gamma * gamma - 2.0 * j * j;
        AsymptoticForm::Broken {
            exponent: lambda,
            prefactor_aa: (base + gamma * lambda) / (2.0 * lambda2),
            prefactor_bb: (base - gamma * lambda) / (2.0 * lambda2),
            prefactor_ab: j * j / lambda2,
            critical_length: critical_length(gamma, j),
        }
    };
    Ok(WaveguideAsymptotics {
        form,
        ordering_at_length: form.ordering_holds(params.length),
    })
}
