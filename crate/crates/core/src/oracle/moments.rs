use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::OracleError;
use crate::model::LinearNetwork;

/// Richardson error estimates above this value reject the step size.
pub const RICHARDSON_TOLERANCE: f64 = 1e-7;

/// Magnitude of |μ| or tr C beyond which the state is rescaled.
const RESCALE_THRESHOLD: f64 = 1e150;

/// First and second moments of a linear network at coordinate `s`.
///
/// Index convention: `cov[(i, j)] = ⟨δv_j† δv_i⟩`, so that
/// `dC/ds = M C + C M† + D_n` and the diagonal holds the fluctuation photon
/// numbers. The commutator channel `C_anti − C` is stored directly because
/// it stays O(1) while both orderings may grow exponentially.
///
/// In the broken phase the moments are kept as `μ = e^L μ̂` and
/// `C = e^{2L} Ĉ` with `L = log_scale`; accessors apply the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub s: f64,
    mean_scaled: DVector<Complex64>,
    cov_scaled: DMatrix<Complex64>,
    commutator: Option<DMatrix<Complex64>>,
    log_scale: f64,
}

impl MomentState {
    /// A state with mean `mu`, no fluctuations and, when `with_commutator`,
    /// the canonical commutator `C_anti − C = 1`.
    pub fn new(mu: DVector<Complex64>, with_commutator: bool) -> Self {
        let n = mu.len();
        Self {
            s: 0.0,
            mean_scaled: mu,
            cov_scaled: DMatrix::zeros(n, n),
            commutator: with_commutator.then(|| DMatrix::identity(n, n)),
            log_scale: 0.0,
        }
    }

    /// Initial state of a network: its initial mean, vacuum fluctuations.
    pub fn initial(network: &LinearNetwork, with_commutator: bool) -> Self {
        Self::new(network.initial_mean().clone(), with_commutator)
    }

    /// Fully specified state at s = 0 with scale 1.
    pub fn from_parts(
        mu: DVector<Complex64>,
        cov: DMatrix<Complex64>,
        commutator: Option<DMatrix<Complex64>>,
    ) -> Result<Self, OracleError> {
        let n = mu.len();
        if cov.shape() != (n, n) || commutator.as_ref().is_some_and(|k| k.shape() != (n, n)) {
            return Err(OracleError::InvalidArgument("moment dimensions do not agree"));
        }
        Ok(Self {
            s: 0.0,
            mean_scaled: mu,
            cov_scaled: cov,
            commutator,
            log_scale: 0.0,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.mean_scaled.len()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn mean(&self) -> DVector<Complex64> {
        &self.mean_scaled * Complex64::new(self.log_scale.exp(), 0.0)
    }

    pub fn cov(&self) -> DMatrix<Complex64> {
        &self.cov_scaled * Complex64::new((2.0 * self.log_scale).exp(), 0.0)
    }

    /// C_anti − C, when the commutator channel was propagated.
    pub fn commutator(&self) -> Option<&DMatrix<Complex64>> {
        self.commutator.as_ref()
    }

    /// Antinormally ordered covariance `⟨δv_i δv_j†⟩`.
    pub fn cov_anti(&self) -> Option<DMatrix<Complex64>> {
        self.commutator.as_ref().map(|k| self.cov() + k)
    }

    /// |μ_p|² part of the port intensity, without the output weight.
    fn coherent_number(&self, port: usize) -> f64 {
        let e = (2.0 * self.log_scale).exp();
        self.mean_scaled[port].norm_sqr() * e
    }

    fn fluctuation_number(&self, port: usize) -> f64 {
        self.cov_scaled[(port, port)].re * (2.0 * self.log_scale).exp()
    }

    /// w_p·(|μ_p|² + C_pp): the intensity leaving port `p`.
    pub fn port_intensity(&self, network: &LinearNetwork, port: usize) -> f64 {
        let w = network.output_weights()[port];
        w * (self.coherent_number(port) + self.fluctuation_number(port))
    }

    /// w_p·C_pp: the quantum-noise part of the port intensity.
    pub fn noise_intensity(&self, network: &LinearNetwork, port: usize) -> f64 {
        network.output_weights()[port] * self.fluctuation_number(port)
    }

    /// w_p·|μ_p|²: the noise-free part of the port intensity.
    pub fn coherent_intensity(&self, network: &LinearNetwork, port: usize) -> f64 {
        network.output_weights()[port] * self.coherent_number(port)
    }

    /// Intensity of the output field `√w·v_p − α_p` travelling back along
    /// the fiber of port `p`, for vacuum fiber inputs.
    pub fn reflected_intensity(&self, network: &LinearNetwork, port: usize) -> f64 {
        self.reflected_coherent_intensity(network, port) + self.noise_intensity(network, port)
    }

    pub fn reflected_coherent_intensity(&self, network: &LinearNetwork, port: usize) -> f64 {
        let w = network.output_weights()[port];
        let mu = self.mean_scaled[port] * self.log_scale.exp();
        (mu * w.sqrt() - network.input_amplitudes()[port]).norm_sqr()
    }

    /// Smallest eigenvalue of the Hermitian part of C.
    pub fn min_cov_eigenvalue(&self) -> f64 {
        let c = self.cov();
        let h = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// ‖C − C†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        let c = self.cov();
        let d = &c - c.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Options for [`propagate_moments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Record every `stride`-th step; the final step is always recorded.
    pub stride: usize,
    /// Also propagate the commutator channel C_anti − C.
    pub antinormal: bool,
    /// Repeat the run at dt/2 and reject dt when the Richardson estimate
    /// exceeds [`RICHARDSON_TOLERANCE`].
    pub richardson_check: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            antinormal: false,
            richardson_check: true,
        }
    }
}

/// Recorded states, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<MomentState>,
    /// Richardson estimate of the final-state relative error, when checked.
    pub richardson_error: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &MomentState {
        self.states.last().expect("a trajectory holds at least its initial state")
    }
}

/// Default step: 1e-4 over the largest rate in the drift.
pub fn default_dt(network: &LinearNetwork) -> f64 {
    let rate = network.drift().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rate > 0.0 {
        1e-4 / rate
    } else {
        1e-4
    }
}

/// Flattened right-hand side of the moment equations.
pub(crate) struct MomentSystem {
    n: usize,
    m: Vec<Complex64>,
    drive: Vec<Complex64>,
    d_normal: Vec<Complex64>,
    d_diff: Vec<Complex64>,
    with_mean: bool,
    with_k: bool,
}

/// y = [μ̂ (n), Ĉ (n²), K (n², optional)], row-major matrices.
pub(crate) struct FlatState {
    pub y: Vec<Complex64>,
    pub log_scale: f64,
}

pub(crate) struct Workspace {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

fn from_row_major(n: usize, v: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(n, n, v)
}

impl MomentSystem {
    pub(crate) fn new(network: &LinearNetwork, with_mean: bool, with_k: bool) -> Self {
        Self {
            n: network.n_modes(),
            m: row_major(network.drift()),
            drive: network.drive().iter().copied().collect(),
            d_normal: row_major(network.diffusion_normal()),
            d_diff: row_major(&network.diffusion_difference()),
            with_mean,
            with_k,
        }
    }

    pub(crate) fn len(&self) -> usize {
        let n = self.n;
        n + n * n + if self.with_k { n * n } else { 0 }
    }

    pub(crate) fn workspace(&self) -> Workspace {
        let len = self.len();
        Workspace {
            k: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]),
            tmp: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub(crate) fn pack(&self, state: &MomentState) -> FlatState {
        let n = self.n;
        let mut y = Vec::with_capacity(self.len());
        y.extend(state.mean_scaled.iter().copied());
        y.extend(row_major(&state.cov_scaled));
        if self.with_k {
            match &state.commutator {
                Some(k) => y.extend(row_major(k)),
                None => y.extend(row_major(&DMatrix::identity(n, n))),
            }
        }
        FlatState {
            y,
            log_scale: state.log_scale,
        }
    }

    pub(crate) fn unpack(&self, flat: &FlatState, s: f64) -> MomentState {
        let n = self.n;
        let n2 = n * n;
        MomentState {
            s,
            mean_scaled: DVector::from_column_slice(&flat.y[..n]),
            cov_scaled: from_row_major(n, &flat.y[n..n + n2]),
            commutator: self.with_k.then(|| from_row_major(n, &flat.y[n + n2..n + 2 * n2])),
            log_scale: flat.log_scale,
        }
    }

    /// out_ij = Σ_k M_ik X_kj + X_ik conj(M_jk) + e·D_ij
    fn lyapunov_rhs(&self, x: &[Complex64], d: &[Complex64], e: f64, out: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut acc = d[i * n + j] * e;
                for k in 0..n {
                    acc += self.m[i * n + k] * x[k * n + j] + x[i * n + k] * self.m[j * n + k].conj();
                }
                out[i * n + j] = acc;
            }
        }
    }

    fn rhs(&self, y: &[Complex64], e1: f64, e2: f64, out: &mut [Complex64]) {
        let n = self.n;
        let n2 = n * n;
        for i in 0..n {
            if self.with_mean {
                let mut acc = self.drive[i] * e1;
                for k in 0..n {
                    acc += self.m[i * n + k] * y[k];
                }
                out[i] = acc;
            } else {
                out[i] = Complex64::new(0.0, 0.0);
            }
        }
        let (head, tail) = out.split_at_mut(n + n2);
        self.lyapunov_rhs(&y[n..n + n2], &self.d_normal, e2, &mut head[n..]);
        if self.with_k {
            self.lyapunov_rhs(&y[n + n2..], &self.d_diff, 1.0, tail);
        }
    }

    /// One classical RK4 step of size h.
    pub(crate) fn step(&self, state: &mut FlatState, h: f64, ws: &mut Workspace) {
        let e1 = (-state.log_scale).exp();
        let e2 = e1 * e1;
        let y = &mut state.y;
        let [k1, k2, k3, k4] = &mut ws.k;
        let tmp = &mut ws.tmp;
        self.rhs(y, e1, e2, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        self.rhs(tmp, e1, e2, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        self.rhs(tmp, e1, e2, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + k3[i] * h;
        }
        self.rhs(tmp, e1, e2, k4);
        let h6 = h / 6.0;
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h6;
        }
        self.rescale(state);
    }

    fn rescale(&self, state: &mut FlatState) {
        let n = self.n;
        let mu_max = state.y[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let trace: f64 = (0..n).map(|i| state.y[n + i * n + i].re).sum::<f64>().abs();
        if mu_max <= RESCALE_THRESHOLD && trace <= RESCALE_THRESHOLD {
            return;
        }
        let shift = mu_max.max(trace.sqrt()).ln();
        let f1 = (-shift).exp();
        let f2 = f1 * f1;
        for z in &mut state.y[..n] {
            *z *= f1;
        }
        for z in &mut state.y[n..n + n * n] {
            *z *= f2;
        }
        state.log_scale += shift;
    }

    /// Largest difference between two final states relative to the size of
    /// each block (μ, C, K) of the reference.
    fn relative_difference(&self, a: &FlatState, reference: &FlatState) -> f64 {
        let n = self.n;
        let n2 = n * n;
        let f1 = (a.log_scale - reference.log_scale).exp();
        let blocks: [(usize, usize, f64); 3] = [(0, n, f1), (n, n + n2, f1 * f1), (n + n2, self.len(), 1.0)];
        let mut worst: f64 = 0.0;
        for (lo, hi, f) in blocks {
            if lo >= hi {
                continue;
            }
            let size = reference.y[lo..hi].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = (lo..hi)
                .map(|i| (a.y[i] * f - reference.y[i]).norm())
                .fold(0.0, f64::max);
            if diff > 0.0 {
                worst = worst.max(diff / size.max(f64::MIN_POSITIVE));
            }
        }
        worst
    }
}

fn check_step(horizon: f64, dt: f64) -> Result<usize, OracleError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(OracleError::InvalidArgument("dt must be positive"));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(OracleError::InvalidArgument("horizon must be non-negative"));
    }
    Ok((horizon / dt).ceil() as usize)
}

/// Integrates the moments of `network` with classical RK4 from `initial`
/// (taken at s = 0) to s = `horizon`. The step is `horizon / ceil(horizon/dt)`
/// so the last step lands on the horizon.
pub fn propagate_moments(
    network: &LinearNetwork,
    horizon: f64,
    dt: f64,
    initial: &MomentState,
    options: PropagationOptions,
) -> Result<Trajectory, OracleError> {
    let steps = check_step(horizon, dt)?;
    if initial.n_modes() != network.n_modes() {
        return Err(OracleError::InvalidArgument("initial state does not match the network"));
    }
    let stride = options.stride.max(1);
    let system = MomentSystem::new(network, true, options.antinormal);
    let mut ws = system.workspace();
    let mut flat = system.pack(initial);
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let mut states = vec![system.unpack(&flat, 0.0)];
    for k in 1..=steps {
        system.step(&mut flat, h, &mut ws);
        if k % stride == 0 || k == steps {
            states.push(system.unpack(&flat, k as f64 * h));
        }
    }
    let mut richardson_error = None;
    if options.richardson_check && steps > 0 {
        let mut fine = system.pack(initial);
        for _ in 0..2 * steps {
            system.step(&mut fine, 0.5 * h, &mut ws);
        }
        let err = system.relative_difference(&flat, &fine) / 15.0;
        if !(err <= RICHARDSON_TOLERANCE) {
            let ratio = if err > 0.0 { (RICHARDSON_TOLERANCE / err).powf(0.25) } else { 0.5 };
            return Err(OracleError::StepTooLarge {
                estimated_error: err,
                suggested_dt: 0.9 * h * ratio.min(1.0),
            });
        }
        richardson_error = Some(err);
    }
    Ok(Trajectory {
        states,
        richardson_error,
    })
}

/// Final state only, without storing the trajectory.
pub fn propagate_to(
    network: &LinearNetwork,
    horizon: f64,
    dt: f64,
    initial: &MomentState,
    options: PropagationOptions,
) -> Result<MomentState, OracleError> {
    let opts = PropagationOptions {
        stride: usize::MAX,
        ..options
    };
    let mut t = propagate_moments(network, horizon, dt, initial, opts)?;
    Ok(t.states.pop().expect("non-empty trajectory"))
}

/// Sweep of a single RK4 run evaluated at each of the (sorted, non-negative)
/// `samples`; one entry per sample in the same order.
pub fn propagate_samples(
    network: &LinearNetwork,
    samples: &[f64],
    dt: f64,
    initial: &MomentState,
    antinormal: bool,
) -> Result<Vec<MomentState>, OracleError> {
    if samples.windows(2).any(|w| w[1] < w[0]) || samples.first().is_some_and(|s| *s < 0.0) {
        return Err(OracleError::InvalidArgument("samples must be sorted and non-negative"));
    }
    let system = MomentSystem::new(network, true, antinormal);
    let mut ws = system.workspace();
    let mut flat = system.pack(initial);
    let mut s = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    for &target in samples {
        let steps = check_step(target - s, dt)?;
        let h = if steps == 0 { 0.0 } else { (target - s) / steps as f64 };
        for _ in 0..steps {
            system.step(&mut flat, h, &mut ws);
        }
        s = target;
        out.push(system.unpack(&flat, s));
    }
    Ok(out)
}
