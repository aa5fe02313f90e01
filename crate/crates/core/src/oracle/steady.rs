use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::moments::MomentState;
use super::OracleError;
use crate::model::{eigenvalues, LinearNetwork};

/// Eigenvalues with Re ≥ −this are treated as not decaying.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Solves M X + X M† + D = 0 through the n² × n² system
/// (I ⊗ M + M̄ ⊗ I) vec X = −vec D.
pub fn solve_lyapunov(
    m: &DMatrix<Complex64>,
    d: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>, OracleError> {
    let n = m.nrows();
    let mut a = DMatrix::<Complex64>::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for k in 0..n {
                a[(row, k + j * n)] += m[(i, k)];
                a[(row, i + k * n)] += m[(j, k)].conj();
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, d.iter().map(|z| -z));
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or(OracleError::InvalidArgument("Lyapunov operator is singular"))?;
    Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
}

/// ‖M X + X M† + D‖_max.
pub fn lyapunov_residual(m: &DMatrix<Complex64>, x: &DMatrix<Complex64>, d: &DMatrix<Complex64>) -> f64 {
    let r = m * x + x * m.adjoint() + d;
    r.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Stationary moments of a decaying network: μ = −M⁻¹ s, C and the
/// commutator channel from their Lyapunov equations.
pub fn steady_state_moments(network: &LinearNetwork) -> Result<MomentState, OracleError> {
    let m = network.drift();
    let max_re = eigenvalues(m).iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= -STABILITY_MARGIN {
        return Err(OracleError::NotSteady { max_real_part: max_re });
    }
    let mu = -m
        .clone()
        .lu()
        .solve(network.drive())
        .ok_or(OracleError::NotSteady { max_real_part: max_re })?;
    let cov = solve_lyapunov(m, network.diffusion_normal())?;
    let commutator = solve_lyapunov(m, &network.diffusion_difference())?;
    MomentState::from_parts(mu, cov, Some(commutator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_resonator_network, InputSide, SystemParams};

    #[test]
    fn golden_steady_ports() {
        let p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.0, 1.0);
        let left = build_resonator_network(&p, InputSide::Left).unwrap();
        let s = steady_state_moments(&left).unwrap();
        assert!((s.port_intensity(&left, 1) - 0.75).abs() < 1e-12);
        let right = build_resonator_network(&p, InputSide::Right).unwrap();
        let s = steady_state_moments(&right).unwrap();
        assert!((s.port_intensity(&right, 0) - 0.875).abs() < 1e-12);
        let d = right.diffusion_normal();
        assert!(lyapunov_residual(right.drift(), &s.cov(), d) <= 1e-12 * 1.0);
    }

    #[test]
    fn thermal_golden() {
        let p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.1, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        let s = steady_state_moments(&net).unwrap();
        assert!((s.noise_intensity(&net, 1) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn noiseless_covariance_vanishes() {
        let p = SystemParams::balanced(1.0, 0.0, 0.5, 1.0, 0.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        let s = steady_state_moments(&net).unwrap();
        assert!(s.cov().iter().all(|z| z.norm() < 1e-15));
        let k = s.commutator().unwrap();
        assert!((k - DMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn balanced_gain_is_not_steady() {
        let p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        assert!(matches!(steady_state_moments(&net), Err(OracleError::NotSteady { .. })));
    }
}
