use nalgebra::DMatrix;
use num_complex::Complex64;

use super::moments::{MomentState, MomentSystem};
use super::OracleError;
use crate::model::LinearNetwork;

/// Propagates C_anti − C from the identity and returns the largest deviation
/// ‖(C_anti − C) − 1‖_max over all steps up to `horizon`.
///
/// The identity is a fixed point exactly when D_a − D_n = −(M + M†).
pub fn commutator_residual(network: &LinearNetwork, horizon: f64, dt: f64) -> Result<f64, OracleError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(OracleError::InvalidArgument("dt must be positive"));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(OracleError::InvalidArgument("horizon must be non-negative"));
    }
    let n = network.n_modes();
    let system = MomentSystem::new(network, false, true);
    let mut ws = system.workspace();
    let init = MomentState::from_parts(
        network.initial_mean().clone(),
        DMatrix::zeros(n, n),
        Some(DMatrix::identity(n, n)),
    )?;
    let mut flat = system.pack(&init);
    let steps = (horizon / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let offset = n + n * n;
    let deviation = |y: &[Complex64]| {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((y[offset + i * n + j] - target).norm());
            }
        }
        worst
    };
    let mut worst = deviation(&flat.y);
    for _ in 0..steps {
        system.step(&mut flat, h, &mut ws);
        worst = worst.max(deviation(&flat.y));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_resonator_network, build_waveguide_network, InputSide, SystemParams, WaveguideParams,
        WaveguidePort,
    };

    #[test]
    fn physical_networks_preserve_commutators() {
        let p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.1, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        assert!(commutator_residual(&net, 10.0, 1e-2).unwrap() <= 1e-8);
        let w = WaveguideParams::pt_symmetric(1.5, 1.0, 10.0, WaveguidePort::B);
        let net = build_waveguide_network(&w).unwrap();
        assert!(commutator_residual(&net, 10.0, 1e-2).unwrap() <= 1e-8);
    }

    #[test]
    fn dropped_fiber_vacuum_is_detected() {
        let p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        let mut d = net.diffusion_antinormal().clone();
        d[(0, 0)] -= Complex64::new(p.kappa_a, 0.0);
        let bad = net.with_diffusion_antinormal(d).unwrap();
        let early = commutator_residual(&bad, 1e-3, 1e-4).unwrap();
        assert!((early / 1e-3 - p.kappa_a).abs() < 1e-2);
        assert!(commutator_residual(&bad, 10.0, 1e-2).unwrap() > 1e-3);
    }
}
