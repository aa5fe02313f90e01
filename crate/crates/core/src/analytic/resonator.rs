use num_complex::Complex64;
use serde::Serialize;

use super::kernels::{remainder_kernel, sinc_kernel, versine_kernel};
use super::{q_of, AnalyticError, IntensityBreakdown, Ratio};
use crate::model::{classify_phase, eigenvalues, resonator_drift, SystemParams, DEFAULT_EP_WINDOW};

/// Intensities of the PT-symmetric resonators at time `t` after the input
/// is switched on. `LR` is transmission from the left fiber to the right
/// fiber, `LL` the reflection back into the left fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientReport {
    pub t: f64,
    #[serde(rename = "I0_LR")]
    pub i0_lr: f64,
    #[serde(rename = "I0_RL")]
    pub i0_rl: f64,
    #[serde(rename = "In_LR")]
    pub in_lr: f64,
    #[serde(rename = "In_RL")]
    pub in_rl: f64,
    #[serde(rename = "I0_LL")]
    pub i0_ll: f64,
    #[serde(rename = "I0_RR")]
    pub i0_rr: f64,
    #[serde(rename = "In_LL")]
    pub in_ll: f64,
    #[serde(rename = "In_RR")]
    pub in_rr: f64,
    /// In_RL − In_LR.
    pub delta_i: f64,
    /// arccos(γ/2J) on the principal branch; complex in the broken phase.
    pub theta: Complex64,
}

impl TransientReport {
    pub fn transmission_lr(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0_lr, self.in_lr)
    }

    pub fn transmission_rl(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0_rl, self.in_rl)
    }

    pub fn reflection_ll(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0_ll, self.in_ll)
    }

    pub fn reflection_rr(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0_rr, self.in_rr)
    }
}

fn check_transient(params: &SystemParams, t: f64) -> Result<(), AnalyticError> {
    params.validate()?;
    if let Some(condition) = params.pt_violation() {
        return Err(AnalyticError::PreconditionViolation { condition });
    }
    if params.n_th != 0.0 {
        return Err(AnalyticError::PreconditionViolation { condition: "n_th = 0" });
    }
    if params.thermal_input_ports {
        return Err(AnalyticError::PreconditionViolation {
            condition: "thermal_input_ports = false",
        });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(AnalyticError::PreconditionViolation { condition: "t >= 0" });
    }
    Ok(())
}

fn check_equal_kappa(params: &SystemParams) -> Result<(), AnalyticError> {
    if params.kappa_a != params.kappa_b {
        return Err(AnalyticError::PreconditionViolation { condition: "kappa_a = kappa_b" });
    }
    Ok(())
}

/// Noise contributions (In_LR, In_RL) for unit fiber couplings.
pub(crate) fn noise_terms(gamma: f64, coupling: f64, t: f64) -> (f64, f64) {
    let q = q_of(gamma, coupling);
    let j2 = coupling * coupling;
    let r = remainder_kernel(q, t);
    let lr = 4.0 * gamma * j2 * r;
    let rl = 2.0 * gamma * gamma * versine_kernel(q, t) + lr + 2.0 * gamma * sinc_kernel(q, t);
    (lr, rl)
}

/// All eight transient intensities of the PT-symmetric resonators at zero
/// temperature.
pub fn resonator_transient(params: &SystemParams, t: f64) -> Result<TransientReport, AnalyticError> {
    check_transient(params, t)?;
    let (gamma, j, flux) = (params.gamma(), params.coupling, params.input_flux);
    let (ka, kb) = (params.kappa_a, params.kappa_b);
    let q = q_of(gamma, j);

    let s4 = sinc_kernel(q, 0.25 * t);
    let i0 = 64.0 * j * j * ka * kb * flux * s4.powi(4);

    let (lr, rl) = noise_terms(gamma, j, t);
    let (in_lr, in_rl) = (kb * lr, ka * rl);

    let s2 = sinc_kernel(q, 0.5 * t);
    let w2 = versine_kernel(q, 0.5 * t);
    let i0_ll = flux * (1.0 - 2.0 * ka * (gamma * w2 + s2)).powi(2);
    let i0_rr = flux * (1.0 + 2.0 * kb * (gamma * w2 - s2)).powi(2);

    Ok(TransientReport {
        t,
        i0_lr: i0,
        i0_rl: i0,
        in_lr,
        in_rl,
        i0_ll,
        i0_rr,
        in_ll: ka * rl,
        in_rr: kb * lr,
        delta_i: in_rl - in_lr,
        theta: Complex64::new(gamma / (2.0 * j), 0.0).acos(),
    })
}

/// ΔI(t) = In_RL − In_LR for κ_a = κ_b = κ.
pub fn delta_i_transient(params: &SystemParams, t: f64) -> Result<f64, AnalyticError> {
    check_transient(params, t)?;
    check_equal_kappa(params)?;
    let (gamma, kappa) = (params.gamma(), params.kappa_a);
    let q = q_of(gamma, params.coupling);
    Ok(2.0 * kappa * gamma * (gamma * versine_kernel(q, t) + sinc_kernel(q, t)))
}

/// ΔI/I⁽⁰⁾_LR together with the long-time limit it approaches in the
/// broken phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeNonreciprocity {
    pub ratio: Ratio,
    pub saturation: Option<f64>,
}

/// Long-time limit γ(γ² − 4J²)(γ + √(γ² − 4J²))/(4J²κI_in) of the relative
/// nonreciprocity. `None` outside the broken phase or without input.
pub fn saturation_constant(params: &SystemParams) -> Option<f64> {
    let (gamma, j) = (params.gamma(), params.coupling);
    let lambda2 = -q_of(gamma, j);
    let kappa = params.kappa_a;
    if lambda2 <= 0.0 || params.input_flux <= 0.0 || kappa <= 0.0 {
        return None;
    }
    Some(gamma * lambda2 * (gamma + lambda2.sqrt()) / (4.0 * j * j * kappa * params.input_flux))
}

/// Below this value I⁽⁰⁾_LR is treated as exactly zero.
const DIVERGENCE_FLOOR: f64 = 1e-300;
/// Relative size of sin(νt/4)/ν against t/4 treated as a zero of I⁽⁰⁾_LR.
const ZERO_RELATIVE: f64 = 1e-10;

/// ΔI(t)/I⁽⁰⁾_LR(t), or `Divergent` where the noise-free transmission
/// vanishes (t = 0 and the periodic zeros of the unbroken phase).
pub fn relative_nonreciprocity_transient(
    params: &SystemParams,
    t: f64,
) -> Result<RelativeNonreciprocity, AnalyticError> {
    let delta = delta_i_transient(params, t)?;
    let report = resonator_transient(params, t)?;
    let q = q_of(params.gamma(), params.coupling);
    let s4 = sinc_kernel(q, 0.25 * t);
    let denominator = report.i0_lr;
    let ratio = if denominator < DIVERGENCE_FLOOR || s4.abs() <= ZERO_RELATIVE * 0.25 * t {
        Ratio::Divergent { denominator }
    } else {
        Ratio::Finite { value: delta / denominator }
    };
    Ok(RelativeNonreciprocity {
        ratio,
        saturation: saturation_constant(params),
    })
}

/// Steady-state intensities of the driven resonators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyReport {
    #[serde(rename = "I0")]
    pub i0: f64,
    #[serde(rename = "In_LR")]
    pub in_lr: f64,
    #[serde(rename = "In_RL")]
    pub in_rl: f64,
    pub delta_i: f64,
    pub relative_nonreciprocity: Ratio,
    pub n_th: f64,
}

impl SteadyReport {
    pub fn transmission_lr(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0, self.in_lr)
    }

    pub fn transmission_rl(&self) -> IntensityBreakdown {
        IntensityBreakdown::new(self.i0, self.in_rl)
    }
}

/// Steady state of balanced, resonant resonators with gain γ_G below the
/// stability boundary, at thermal occupancy n_th.
pub fn resonator_steady(params: &SystemParams) -> Result<SteadyReport, AnalyticError> {
    params.validate()?;
    if let Some(condition) = params.balance_violation() {
        return Err(AnalyticError::PreconditionViolation { condition });
    }
    if params.thermal_input_ports {
        return Err(AnalyticError::PreconditionViolation {
            condition: "thermal_input_ports = false",
        });
    }
    if !classify_phase(params, DEFAULT_EP_WINDOW).steady_state_stable {
        let ev = eigenvalues(&resonator_drift(params));
        return Err(AnalyticError::NotSteady {
            eigenvalues: [ev[0], ev[1]],
        });
    }
    let p = params;
    let (gamma, gg, j2, n) = (p.gamma(), p.gamma_g, p.coupling * p.coupling, p.n_th);
    let d1 = 4.0 * j2 + gamma * (gamma - gg);
    let d2 = 2.0 * gamma - gg;
    let i0 = 16.0 * j2 * p.kappa_a * p.kappa_b * p.input_flux / (d1 * d1);
    let source_a = gg + p.gamma_a * n;
    let source_b = p.gamma_b * n;
    let in_lr = p.kappa_b
        * (4.0 * j2 * source_a + source_b * (4.0 * j2 + (gamma - gg) * (2.0 * gamma - gg)))
        / (d2 * d1);
    let in_rl = p.kappa_a * ((4.0 * j2 + gamma * (2.0 * gamma - gg)) * source_a + 4.0 * j2 * source_b)
        / (d2 * d1);
    let delta_i = in_rl - in_lr;
    let relative_nonreciprocity = if i0 < DIVERGENCE_FLOOR {
        Ratio::Divergent { denominator: i0 }
    } else {
        Ratio::Finite { value: delta_i / i0 }
    };
    Ok(SteadyReport {
        i0,
        in_lr,
        in_rl,
        delta_i,
        relative_nonreciprocity,
        n_th: n,
    })
}
