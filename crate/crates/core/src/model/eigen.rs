use nalgebra::DMatrix;
use num_complex::Complex64;

use super::network::LinearNetwork;
use super::ModelError;

/// Default relative window for declaring two eigenvalues coalesced.
pub const DEFAULT_EP_WINDOW: f64 = 1e-9;

/// Eigenvalues and left/right eigenvector matrices of a drift matrix,
/// `left · M · right = diag(eigenvalues)` and `left · right = 1`.
///
/// Rows of `left` are left eigenvectors; columns of `right` are right
/// eigenvectors, so `right = left⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// For two modes, ordered as (λ₋, λ₊) with λ∓ = tr/2 ∓ √disc on the
    /// principal branch.
    pub eigenvalues: Vec<Complex64>,
    pub left: DMatrix<Complex64>,
    pub right: DMatrix<Complex64>,
    /// Eigenvalue splitting λ₊ − λ₋ for two modes. For the PT-symmetric
    /// drift this is √(γ² − 4J²).
    pub splitting: Option<Complex64>,
}

impl EigenDecomposition {
    /// ‖left·M·right − diag(λ)‖_max.
    pub fn diagonalization_residual(&self, m: &DMatrix<Complex64>) -> f64 {
        let mut d = &self.left * m * &self.right;
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            d[(k, k)] -= lam;
        }
        max_abs(&d)
    }

    /// ‖left·right − 1‖_max.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.eigenvalues.len();
        let a = &self.left * &self.right - DMatrix::identity(n, n);
        let b = &self.right * &self.left - DMatrix::identity(n, n);
        max_abs(&a).max(max_abs(&b))
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of the network drift.
pub fn eigendecompose(network: &LinearNetwork) -> Result<EigenDecomposition, ModelError> {
    eigendecompose_matrix(network.drift(), DEFAULT_EP_WINDOW)
}

/// Closed form for 2×2 matrices with a nonzero upper coupling; the dense
/// Schur route otherwise.
pub fn eigendecompose_matrix(
    m: &DMatrix<Complex64>,
    ep_window: f64,
) -> Result<EigenDecomposition, ModelError> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(ModelError::Dimension("drift must be a non-empty square matrix"));
    }
    if m.nrows() == 2 && m[(0, 1)] != Complex64::new(0.0, 0.0) {
        closed_form_2x2(m, ep_window)
    } else {
        eigendecompose_numeric(m, ep_window)
    }
}

fn closed_form_2x2(m: &DMatrix<Complex64>, ep_window: f64) -> Result<EigenDecomposition, ModelError> {
    let (m11, m12, m21, m22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = 0.5 * (m11 + m22);
    let half_diff = 0.5 * (m11 - m22);
    let disc = half_diff * half_diff + m12 * m21;
    let scale = half_diff.norm_sqr() + (m12 * m21).norm();
    if disc.norm() <= ep_window * scale {
        return Err(ModelError::DefectiveMatrix { eigenvalue: half_tr });
    }
    let root = disc.sqrt();
    let lam_minus = half_tr - root;
    let lam_plus = half_tr + root;
    // Left eigenvector rows (u, 1) with u = (λ − m22) / m12.
    let u_minus = (lam_minus - m22) / m12;
    let u_plus = (lam_plus - m22) / m12;
    let one = Complex64::new(1.0, 0.0);
    let left = DMatrix::from_row_slice(2, 2, &[u_minus, one, u_plus, one]);
    let det = u_minus - u_plus;
    let right = DMatrix::from_row_slice(2, 2, &[one / det, -one / det, -u_plus / det, u_minus / det]);
    Ok(EigenDecomposition {
        eigenvalues: vec![lam_minus, lam_plus],
        left,
        right,
        splitting: Some(2.0 * root),
    })
}

/// Eigenvalues without requiring diagonalizability. Two-mode matrices are
/// ordered (λ₋, λ₊) as in [`EigenDecomposition`].
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 2 && m.ncols() == 2 {
        let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
        let root = (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).sqrt();
        return vec![half_tr - root, half_tr + root];
    }
    m.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Dense route: complex Schur form `M = Q T Q†`, then eigenvectors of the
/// triangular factor by back substitution.
pub fn eigendecompose_numeric(
    m: &DMatrix<Complex64>,
    ep_window: f64,
) -> Result<EigenDecomposition, ModelError> {
    let n = m.nrows();
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let (q, t) = m.clone().schur().unpack();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let gap = t[(j, j)] - lam;
            if gap.norm() <= ep_window.max(1e-13) * scale {
                if acc.norm() <= 1e-13 * scale {
                    // Repeated eigenvalue with an independent eigenvector.
                    continue;
                }
                return Err(ModelError::DefectiveMatrix { eigenvalue: lam });
            }
            y[(j, k)] = -acc / gap;
        }
    }
    let mut right = q * y;
    for mut col in right.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or(ModelError::DefectiveMatrix { eigenvalue: t[(0, 0)] })?;
    let eigenvalues = (0..n).map(|k| t[(k, k)]).collect();
    Ok(EigenDecomposition {
        eigenvalues,
        left,
        right,
        splitting: None,
    })
}
