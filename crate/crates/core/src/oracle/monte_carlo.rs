use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::OracleError;
use crate::model::LinearNetwork;

/// Trajectories per reduction batch. Fixed so the reduction order, and
/// therefore every bit of the result, does not depend on the thread count.
const BATCH: u64 = 512;

/// Mean and standard error of one estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of normally ordered output intensities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    /// Total output intensity summed over ports.
    pub mean: f64,
    pub std_error: f64,
    pub n_trajectories: u64,
    pub seed: u64,
    /// w_p·⟨|v_p|²⟩ for every port.
    pub ports: Vec<PortEstimate>,
    /// Port 0 minus port 1, estimated per trajectory so the correlated
    /// fluctuations cancel. `None` for single-mode networks.
    pub imbalance: Option<PortEstimate>,
}

/// Welford accumulator, merged with the pairwise update of Chan et al.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        self.n = n;
    }

    /// Sample standard deviation over √n; zero for a single sample.
    fn estimate(&self) -> PortEstimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        PortEstimate {
            mean: self.mean,
            std_error,
        }
    }
}

struct BatchResult {
    ports: Vec<Welford>,
    total: Welford,
    imbalance: Welford,
    failure: Option<(f64, u64)>,
}

/// Noise loading B with B B† = D, one column per positive eigenvalue.
fn noise_factor(d: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = d.nrows();
    let h = (d + d.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let cols: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    let mut b = DMatrix::zeros(n, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        let s = eig.eigenvalues[k].sqrt();
        for i in 0..n {
            b[(i, c)] = eig.eigenvectors[(i, k)] * s;
        }
    }
    b
}

struct Sampler {
    n: usize,
    m: Vec<Complex64>,
    drive: Vec<Complex64>,
    b: Vec<Complex64>,
    rank: usize,
    weights: Vec<f64>,
    v0: Vec<Complex64>,
    h: f64,
    pairs: usize,
}

impl Sampler {
    fn euler(&self, v: &mut [Complex64], tmp: &mut [Complex64], h: f64, noise: &[Complex64]) {
        let n = self.n;
        for i in 0..n {
            let mut acc = self.drive[i];
            for k in 0..n {
                acc += self.m[i * n + k] * v[k];
            }
            let mut w = Complex64::new(0.0, 0.0);
            for r in 0..self.rank {
                w += self.b[i * self.rank + r] * noise[r];
            }
            tmp[i] = v[i] + acc * h + w;
        }
        v.copy_from_slice(&tmp[..n]);
    }

    /// Runs one trajectory pair (step h and step 2h driven by the same
    /// increments) and returns the extrapolated samples 2·X_h − X_2h, or the
    /// coordinate of the first non-finite value.
    fn trajectory(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<(), f64> {
        let n = self.n;
        let mut fine = self.v0.clone();
        let mut coarse = self.v0.clone();
        let mut tmp = vec![Complex64::new(0.0, 0.0); n];
        let mut xi = [vec![Complex64::new(0.0, 0.0); self.rank], vec![Complex64::new(0.0, 0.0); self.rank]];
        let mut sum = vec![Complex64::new(0.0, 0.0); self.rank];
        let scale = (0.5 * self.h).sqrt();
        for pair in 0..self.pairs {
            for x in xi.iter_mut() {
                for z in x.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *z = Complex64::new(re * scale, im * scale);
                }
            }
            self.euler(&mut fine, &mut tmp, self.h, &xi[0]);
            self.euler(&mut fine, &mut tmp, self.h, &xi[1]);
            for r in 0..self.rank {
                sum[r] = xi[0][r] + xi[1][r];
            }
            self.euler(&mut coarse, &mut tmp, 2.0 * self.h, &sum);
            if fine.iter().chain(coarse.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(2.0 * self.h * (pair + 1) as f64);
            }
        }
        for p in 0..n {
            let w = self.weights[p];
            out[p] = w * (2.0 * fine[p].norm_sqr() - coarse[p].norm_sqr());
        }
        Ok(())
    }
}

/// Euler–Maruyama estimate of the port intensities at s = `horizon`.
///
/// Increments obey ⟨dW_i dW_j*⟩ = (D_n)_ij ds, which reproduces every
/// normally ordered second moment of the linear network. Each trajectory is
/// integrated at step h and, with the summed increments, at 2h; the
/// per-trajectory estimator 2·X_h − X_2h removes the O(h) weak bias.
///
/// Trajectory `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream
/// `k`, so the estimate is identical for any degree of parallelism.
pub fn monte_carlo_intensity(
    network: &LinearNetwork,
    horizon: f64,
    dt: f64,
    n_traj: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, OracleError> {
    if n_traj == 0 {
        return Err(OracleError::InvalidArgument("n_traj must be at least 1"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(OracleError::InvalidArgument("dt must be positive"));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(OracleError::InvalidArgument("horizon must be non-negative"));
    }
    let n = network.n_modes();
    let pairs = (horizon / (2.0 * dt)).ceil() as usize;
    let h = if pairs == 0 { 0.0 } else { horizon / (2 * pairs) as f64 };
    let b = noise_factor(network.diffusion_normal());
    let rank = b.ncols();
    let mut b_flat = Vec::with_capacity(n * rank);
    for i in 0..n {
        for r in 0..rank {
            b_flat.push(b[(i, r)]);
        }
    }
    let drift = network.drift();
    let sampler = Sampler {
        n,
        m: (0..n * n).map(|k| drift[(k / n, k % n)]).collect(),
        drive: network.drive().iter().copied().collect(),
        b: b_flat,
        rank,
        weights: network.output_weights().to_vec(),
        v0: network.initial_mean().iter().copied().collect(),
        h,
        pairs,
    };

    let n_batches = n_traj.div_ceil(BATCH);
    let batches: Vec<BatchResult> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let mut res = BatchResult {
                ports: vec![Welford::default(); n],
                total: Welford::default(),
                imbalance: Welford::default(),
                failure: None,
            };
            let mut sample = vec![0.0; n];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in batch * BATCH..((batch + 1) * BATCH).min(n_traj) {
                rng.set_stream(k);
                rng.set_word_pos(0);
                match sampler.trajectory(&mut rng, &mut sample) {
                    Ok(()) => {
                        for p in 0..n {
                            res.ports[p].push(sample[p]);
                        }
                        res.total.push(sample.iter().sum());
                        if n >= 2 {
                            res.imbalance.push(sample[0] - sample[1]);
                        }
                    }
                    Err(s) => {
                        if res.failure.is_none_or(|(s0, _)| s < s0) {
                            res.failure = Some((s, k));
                        }
                    }
                }
            }
            res
        })
        .collect();

    let mut ports = vec![Welford::default(); n];
    let mut total = Welford::default();
    let mut imbalance = Welford::default();
    let mut failure: Option<(f64, u64)> = None;
    for r in &batches {
        for p in 0..n {
            ports[p].merge(&r.ports[p]);
        }
        total.merge(&r.total);
        imbalance.merge(&r.imbalance);
        if let Some((s, k)) = r.failure {
            if failure.is_none_or(|(s0, _)| s < s0) {
                failure = Some((s, k));
            }
        }
    }
    if let Some((s, trajectory)) = failure {
        return Err(OracleError::NonFiniteSample { s, trajectory });
    }
    let t = total.estimate();
    Ok(MonteCarloEstimate {
        mean: t.mean,
        std_error: t.std_error,
        n_trajectories: n_traj,
        seed,
        ports: ports.iter().map(Welford::estimate).collect(),
        imbalance: (n >= 2).then(|| imbalance.estimate()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_resonator_network, InputSide, SystemParams};
    use crate::oracle::{propagate_to, MomentState, PropagationOptions};

    #[test]
    fn noiseless_single_trajectory_follows_mean() {
        let p = SystemParams::pt_symmetric(1.0, 0.5, 1.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap().without_noise();
        let mc = monte_carlo_intensity(&net, 1.0, 1e-4, 1, 7).unwrap();
        let ode = propagate_to(&net, 1.0, 1e-3, &MomentState::initial(&net, false), PropagationOptions::default())
            .unwrap();
        for port in 0..2 {
            let exact = ode.port_intensity(&net, port);
            assert!((mc.ports[port].mean - exact).abs() < 1e-6, "{port}");
            assert_eq!(mc.ports[port].std_error, 0.0);
        }
    }

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-15);
        assert!((a.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let p = SystemParams::pt_symmetric(40.0, 1.0, 1.0, 1.0);
        let net = build_resonator_network(&p, InputSide::Left).unwrap();
        match monte_carlo_intensity(&net, 40.0, 1e-2, 4, 1) {
            Err(OracleError::NonFiniteSample { s, .. }) => assert!(s > 0.0 && s <= 40.0),
            other => panic!("{other:?}"),
        }
    }
}
