//! Closed-form intensities for the PT-symmetric resonators and waveguides.
//!
//! Every formula goes through the kernels in [`kernels`], which are entire
//! functions of q = 4J² − γ². The same code therefore covers the unbroken
//! phase, the broken phase and the exceptional point.

pub mod kernels;
mod resonator;
mod waveguide;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{ModelError, Phase};

pub use resonator::{
    delta_i_transient, relative_nonreciprocity_transient, resonator_steady, resonator_transient,
    saturation_constant, RelativeNonreciprocity, SteadyReport, TransientReport,
};
pub use waveguide::{
    critical_length, waveguide_asymptotics, waveguide_outputs, AsymptoticForm, WaveguideAsymptotics,
    WaveguideReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("closed form requires {condition}")]
    PreconditionViolation { condition: &'static str },
    #[error("no steady state: Re[Λ-] = {}, Re[Λ+] = {}", .eigenvalues[0].re, .eigenvalues[1].re)]
    NotSteady { eigenvalues: [Complex64; 2] },
    #[error("asymptotic forms need the broken phase, parameters are {phase}")]
    PhaseError { phase: Phase },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// An output intensity split into the part present without noise and the
/// quantum-noise part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityBreakdown {
    pub noise_free: f64,
    pub noise: f64,
    pub total: f64,
}

impl IntensityBreakdown {
    pub fn new(noise_free: f64, noise: f64) -> Self {
        Self {
            noise_free,
            noise,
            total: noise_free + noise,
        }
    }
}

/// A ratio whose denominator may vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ratio {
    Finite { value: f64 },
    Divergent { denominator: f64 },
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite { value } => Some(value),
            Ratio::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Ratio::Divergent { .. })
    }
}

/// 4J² − γ², factored to keep relative accuracy near γ = 2J.
pub(crate) fn q_of(gamma: f64, coupling: f64) -> f64 {
    (2.0 * coupling - gamma) * (2.0 * coupling + gamma)
}
