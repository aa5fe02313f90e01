//! Light-intensity transport through PT-symmetric gain/loss resonators and
//! waveguides, including the nonreciprocity generated by the quantum noise of
//! the gain medium.
//!
//! * [`model`] builds the linear Langevin networks and classifies the PT phase.
//! * [`analytic`] evaluates every closed-form intensity.
//! * [`oracle`] is the independent numerical ground truth: moment ODEs, the
//!   Lyapunov steady state, a Monte Carlo sampler and a commutator check.
//! * [`cli`] runs parameter sweeps and validation reports.

pub mod analytic;
pub mod cli;
pub mod model;
pub mod oracle;
