//! System parameters, the linear Langevin networks built from them, the
//! 2×2 non-Hermitian eigendecomposition and PT-phase classification.

mod eigen;
mod network;
mod params;
mod phase;

use num_complex::Complex64;
use thiserror::Error;

pub use eigen::{
    eigendecompose, eigendecompose_matrix, eigendecompose_numeric, eigenvalues, EigenDecomposition,
    DEFAULT_EP_WINDOW,
};
pub use network::{
    build_resonator_network, build_waveguide_network, resonator_drift, waveguide_drift,
    EvolutionVariable, LinearNetwork,
};
pub use params::{InputSide, SystemParams, WaveguideParams, WaveguidePort, PT_RELATIVE_TOLERANCE};
pub use phase::{
    classify_phase, stability_by_inequality, stability_by_spectrum, GainLossPair, Phase, PhaseLabel,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {name} must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("parameter {name} must be finite")]
    NonFinite { name: &'static str },
    #[error("coupling J = 0 leaves the two modes uncoupled")]
    ZeroCoupling,
    #[error("waveguide length must be non-negative, got {0}")]
    NegativeLength(f64),
    #[error("{name} is not Hermitian")]
    NotHermitian { name: &'static str },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("drift matrix is defective at eigenvalue {eigenvalue}")]
    DefectiveMatrix { eigenvalue: Complex64 },
}
