//! Numerical ground truth for the closed forms: RK4 moment propagation,
//! Lyapunov steady states, an Euler–Maruyama sampler and a commutator check.

mod commutator;
mod moments;
mod monte_carlo;
mod steady;

use thiserror::Error;

use crate::model::ModelError;

pub use commutator::commutator_residual;
pub use moments::{
    default_dt, propagate_moments, propagate_samples, propagate_to, MomentState, PropagationOptions,
    Trajectory, RICHARDSON_TOLERANCE,
};
pub use monte_carlo::{monte_carlo_intensity, MonteCarloEstimate, PortEstimate};
pub use steady::{lyapunov_residual, solve_lyapunov, steady_state_moments, STABILITY_MARGIN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("step too large: Richardson error {estimated_error:.3e}, try dt = {suggested_dt:.3e}")]
    StepTooLarge { estimated_error: f64, suggested_dt: f64 },
    #[error("no steady state: largest Re[eigenvalue] = {max_real_part}")]
    NotSteady { max_real_part: f64 },
    #[error("trajectory {trajectory} became non-finite at s = {s}")]
    NonFiniteSample { s: f64, trajectory: u64 },
    #[error("{0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}
