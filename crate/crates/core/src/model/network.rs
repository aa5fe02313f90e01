use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::params::{InputSide, SystemParams, WaveguideParams, WaveguidePort};
use super::ModelError;

const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// What the linear network evolves along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionVariable {
    Time,
    Position,
}

/// An n-mode linear Langevin network
///
/// ```text
/// dv/ds = M v + s_drive + f,   ⟨f_i† f_j⟩ = (D_n)_ji δ,   ⟨f_i f_j†⟩ = (D_a)_ij δ
/// ```
///
/// Both diffusion matrices are Hermitian rate matrices. `diffusion_antinormal`
/// includes the vacuum contribution of the fiber input ports.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNetwork {
    drift: DMatrix<Complex64>,
    diffusion_normal: DMatrix<Complex64>,
    diffusion_antinormal: DMatrix<Complex64>,
    drive: DVector<Complex64>,
    input_amplitudes: DVector<Complex64>,
    initial_mean: DVector<Complex64>,
    output_weights: Vec<f64>,
    evolution: EvolutionVariable,
}

fn check_hermitian(name: &'static str, m: &DMatrix<Complex64>) -> Result<(), ModelError> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOLERANCE * scale {
                return Err(ModelError::NotHermitian { name });
            }
        }
    }
    Ok(())
}

impl LinearNetwork {
    /// Generic network. Input amplitudes and the initial mean default to zero.
    pub fn new(
        drift: DMatrix<Complex64>,
        diffusion_normal: DMatrix<Complex64>,
        diffusion_antinormal: DMatrix<Complex64>,
        drive: DVector<Complex64>,
        output_weights: Vec<f64>,
        evolution: EvolutionVariable,
    ) -> Result<Self, ModelError> {
        let n = drift.nrows();
        if n == 0 || drift.ncols() != n {
            return Err(ModelError::Dimension("drift must be a non-empty square matrix"));
        }
        if diffusion_normal.shape() != (n, n) || diffusion_antinormal.shape() != (n, n) {
            return Err(ModelError::Dimension("diffusion matrices must match the drift"));
        }
        if drive.len() != n || output_weights.len() != n {
            return Err(ModelError::Dimension("drive and output weights need one entry per mode"));
        }
        if output_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(ModelError::NegativeRate {
                name: "output_weights",
                value: output_weights.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
        check_hermitian("diffusion_normal", &diffusion_normal)?;
        check_hermitian("diffusion_antinormal", &diffusion_antinormal)?;
        Ok(Self {
            drift,
            diffusion_normal,
            diffusion_antinormal,
            drive,
            input_amplitudes: DVector::zeros(n),
            initial_mean: DVector::zeros(n),
            output_weights,
            evolution,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.drift.nrows()
    }

    pub fn drift(&self) -> &DMatrix<Complex64> {
        &self.drift
    }

    pub fn diffusion_normal(&self) -> &DMatrix<Complex64> {
        &self.diffusion_normal
    }

    pub fn diffusion_antinormal(&self) -> &DMatrix<Complex64> {
        &self.diffusion_antinormal
    }

    pub fn drive(&self) -> &DVector<Complex64> {
        &self.drive
    }

    /// Coherent amplitudes of the incoming fiber fields, used for reflected
    /// intensities `|√w·v − α|²`.
    pub fn input_amplitudes(&self) -> &DVector<Complex64> {
        &self.input_amplitudes
    }

    pub fn initial_mean(&self) -> &DVector<Complex64> {
        &self.initial_mean
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn evolution(&self) -> EvolutionVariable {
        self.evolution
    }

    pub fn with_input_amplitudes(mut self, amplitudes: DVector<Complex64>) -> Result<Self, ModelError> {
        if amplitudes.len() != self.n_modes() {
            return Err(ModelError::Dimension("input amplitudes need one entry per mode"));
        }
        self.input_amplitudes = amplitudes;
        Ok(self)
    }

    pub fn with_initial_mean(mut self, mean: DVector<Complex64>) -> Result<Self, ModelError> {
        if mean.len() != self.n_modes() {
            return Err(ModelError::Dimension("initial mean needs one entry per mode"));
        }
        self.initial_mean = mean;
        Ok(self)
    }

    /// Replaces the antinormal diffusion, e.g. to build a negative control.
    pub fn with_diffusion_antinormal(mut self, d: DMatrix<Complex64>) -> Result<Self, ModelError> {
        if d.shape() != self.drift.shape() {
            return Err(ModelError::Dimension("diffusion matrices must match the drift"));
        }
        check_hermitian("diffusion_antinormal", &d)?;
        self.diffusion_antinormal = d;
        Ok(self)
    }

    /// Same network with both diffusion matrices zeroed.
    pub fn without_noise(mut self) -> Self {
        let n = self.n_modes();
        self.diffusion_normal = DMatrix::zeros(n, n);
        self.diffusion_antinormal = DMatrix::zeros(n, n);
        self
    }

    /// Same network with no coherent drive and no initial amplitude: only the
    /// quantum-noise contribution survives.
    pub fn without_signal(mut self) -> Self {
        let n = self.n_modes();
        self.drive = DVector::zeros(n);
        self.input_amplitudes = DVector::zeros(n);
        self.initial_mean = DVector::zeros(n);
        self
    }

    /// D_a − D_n, which must equal −(M + M†) for commutators to be preserved.
    pub fn diffusion_difference(&self) -> DMatrix<Complex64> {
        &self.diffusion_antinormal - &self.diffusion_normal
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn diag2(a: f64, b: f64) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[c(a), c(0.0), c(0.0), c(b)])
}

/// Drift matrix of the coupled resonators.
pub fn resonator_drift(p: &SystemParams) -> DMatrix<Complex64> {
    let ij = Complex64::new(0.0, p.coupling);
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (p.gamma_g - p.gamma_a - p.kappa_a), -p.detuning_a),
            ij,
            ij,
            Complex64::new(-0.5 * (p.gamma_b + p.kappa_b), -p.detuning_b),
        ],
    )
}

/// Drift matrix of the coupled waveguides; evolution is along z.
pub fn waveguide_drift(p: &WaveguideParams) -> DMatrix<Complex64> {
    let ij = Complex64::new(0.0, p.coupling);
    DMatrix::from_row_slice(2, 2, &[c(0.5 * p.effective_gain()), ij, ij, c(-0.5 * p.gamma)])
}

/// Resonator network driven through the fiber on `side` with a coherent
/// amplitude √I_in.
///
/// A single-photon input enters the reported observables only through
/// ⟨a_in† a_in⟩ = I_in, so a constant coherent drive of that flux gives the
/// same normally ordered second moments.
pub fn build_resonator_network(
    params: &SystemParams,
    side: InputSide,
) -> Result<LinearNetwork, ModelError> {
    params.validate()?;
    let p = params;
    let n = p.n_th;
    let port_thermal = if p.thermal_input_ports { n } else { 0.0 };
    let normal = diag2(
        p.gamma_g + p.gamma_a * n + p.kappa_a * port_thermal,
        p.gamma_b * n + p.kappa_b * port_thermal,
    );
    let antinormal = diag2(
        p.gamma_a * (n + 1.0) + p.kappa_a * (port_thermal + 1.0),
        p.gamma_b * (n + 1.0) + p.kappa_b * (port_thermal + 1.0),
    );
    let alpha = p.input_flux.sqrt();
    let amplitudes = match side {
        InputSide::Left => DVector::from_vec(vec![c(alpha), c(0.0)]),
        InputSide::Right => DVector::from_vec(vec![c(0.0), c(alpha)]),
    };
    let drive = DVector::from_vec(vec![
        amplitudes[0] * p.kappa_a.sqrt(),
        amplitudes[1] * p.kappa_b.sqrt(),
    ]);
    LinearNetwork::new(
        resonator_drift(p),
        normal,
        antinormal,
        drive,
        vec![p.kappa_a, p.kappa_b],
        EvolutionVariable::Time,
    )?
    .with_input_amplitudes(amplitudes)
}

/// Waveguide network with the photon launched into `params.input`.
pub fn build_waveguide_network(params: &WaveguideParams) -> Result<LinearNetwork, ModelError> {
    params.validate()?;
    let p = params;
    let normal = diag2(p.gamma_g + p.gamma * p.n_th, p.gamma * p.n_th);
    let antinormal = diag2(p.gamma * (p.n_th + 1.0), p.gamma * (p.n_th + 1.0));
    let mean = match p.input {
        WaveguidePort::A => DVector::from_vec(vec![c(1.0), c(0.0)]),
        WaveguidePort::B => DVector::from_vec(vec![c(0.0), c(1.0)]),
    };
    LinearNetwork::new(
        waveguide_drift(p),
        normal,
        antinormal,
        DVector::zeros(2),
        vec![1.0, 1.0],
        EvolutionVariable::Position,
    )?
    .with_initial_mean(mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn resonator_drift_substitution() {
        let p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        let m = net.drift();
        assert_eq!(m[(0, 0)], c(0.5));
        assert_eq!(m[(0, 1)], i());
        assert_eq!(m[(1, 0)], i());
        assert_eq!(m[(1, 1)], c(-0.5));
        assert_eq!(net.output_weights(), &[0.5, 0.5]);
        assert_eq!(net.drive()[0], c(0.5f64.sqrt()));
        assert_eq!(net.drive()[1], c(0.0));
    }

    #[test]
    fn passive_zero_temperature_has_no_normal_noise() {
        let p = SystemParams::balanced(1.0, 0.0, 0.5, 1.0, 0.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Right).unwrap();
        assert!(net.diffusion_normal().iter().all(|z| *z == c(0.0)));
        assert_eq!(net.drive()[1], c(0.5f64.sqrt()));
    }

    #[test]
    fn thermal_antinormal_diffusion() {
        let p = SystemParams::balanced(1.0, 1.0, 0.5, 1.0, 0.1, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        let d = net.diffusion_antinormal();
        assert!((d[(0, 0)].re - 1.05).abs() < 1e-15);
        assert!((d[(1, 1)].re - 1.05).abs() < 1e-15);
    }

    #[test]
    fn diffusion_difference_matches_drift() {
        let mut p = SystemParams::balanced(1.3, 0.7, 0.4, 0.9, 0.3, 1.0);
        for ports in [false, true] {
            p.thermal_input_ports = ports;
            let net = build_resonator_network(&p, InputSide::Left).unwrap();
            let m = net.drift();
            let sum = net.diffusion_difference() + m + m.adjoint();
            assert!(sum.iter().all(|z| z.norm() < 1e-14), "{sum}");
        }
        let w = WaveguideParams { n_th: 0.2, ..WaveguideParams::pt_symmetric(1.5, 1.0, 1.0, WaveguidePort::A) };
        let net = build_waveguide_network(&w).unwrap();
        let m = net.drift();
        let sum = net.diffusion_difference() + m + m.adjoint();
        assert!(sum.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn waveguide_network_shape() {
        let w = WaveguideParams::pt_symmetric(2.0, 1.0, 1.0, WaveguidePort::A);
        let net = build_waveguide_network(&w).unwrap();
        assert_eq!(net.drift()[(0, 0)], c(1.0));
        assert_eq!(net.drift()[(1, 1)], c(-1.0));
        assert_eq!(net.initial_mean()[0], c(1.0));
        assert_eq!(net.initial_mean()[1], c(0.0));
        let w1 = WaveguideParams::pt_symmetric(1.0, 1.0, 1.0, WaveguidePort::B);
        let net = build_waveguide_network(&w1).unwrap();
        assert_eq!(net.diffusion_normal()[(0, 0)], c(2.0));
        assert_eq!(net.diffusion_normal()[(1, 1)], c(0.0));
        assert_eq!(net.initial_mean()[1], c(1.0));
        assert_eq!(net.evolution(), EvolutionVariable::Position);
    }

    #[test]
    fn rejects_non_hermitian_diffusion() {
        let mut d = DMatrix::zeros(2, 2);
        d[(0, 1)] = c(1.0);
        let r = LinearNetwork::new(
            DMatrix::zeros(2, 2),
            d.clone(),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            vec![1.0, 1.0],
            EvolutionVariable::Time,
        );
        assert_eq!(r, Err(ModelError::NotHermitian { name: "diffusion_normal" }));
    }
}
