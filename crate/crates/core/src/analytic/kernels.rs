//! Entire functions of q = 4J² − γ² shared by every closed form.
//!
//! Each kernel is written with ν = √q on the complex principal branch, so
//! the unbroken (q > 0) and broken (q < 0) phases use one expression. Near
//! q·t² = 0 the removable singularities are evaluated from their Taylor
//! series.

use num_complex::Complex64;

/// Below this value of |q|·t² the kernels switch to their series.
pub const SERIES_THRESHOLD: f64 = 1e-2;

const SERIES_TERMS: usize = 12;

fn nu(q: f64) -> Complex64 {
    Complex64::new(q, 0.0).sqrt()
}

/// Σ_k (−q t²)^k t^p / (p + 2k)!  for the given odd/even offset p.
fn series(q: f64, t: f64, p: u32) -> f64 {
    let x = -q * t * t;
    let mut term = t.powi(p as i32) / (1..=p).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..SERIES_TERMS {
        let a = f64::from(p) + 2.0 * k as f64;
        term *= x / (a * (a - 1.0));
        sum += term;
    }
    sum
}

fn small(q: f64, t: f64) -> bool {
    q.abs() * t * t < SERIES_THRESHOLD
}

/// sin(νt)/ν, equal to t at q = 0.
pub fn sinc_kernel(q: f64, t: f64) -> f64 {
    if small(q, t) {
        return series(q, t, 1);
    }
    let v = nu(q);
    ((v * t).sin() / v).re
}

/// cos(νt).
pub fn cos_kernel(q: f64, t: f64) -> f64 {
    if small(q, t) {
        return series(q, t, 0);
    }
    (nu(q) * t).cos().re
}

/// (1 − cos νt)/q, equal to t²/2 at q = 0.
pub fn versine_kernel(q: f64, t: f64) -> f64 {
    let s = sinc_kernel(q, 0.5 * t);
    2.0 * s * s
}

/// (t − sin(νt)/ν)/q, equal to t³/6 at q = 0.
pub fn remainder_kernel(q: f64, t: f64) -> f64 {
    if small(q, t) {
        return series(q, t, 3);
    }
    (t - sinc_kernel(q, t)) / q
}
