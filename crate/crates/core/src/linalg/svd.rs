//! One-sided Jacobi SVD and the routines built on it.

use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix};
use super::qr::{check_finite, complete_basis};
use crate::error::{Error, Result};

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;
/// A column pair is rotated while `|wₚ·w_q| > JACOBI_TOL * ‖wₚ‖‖w_q‖`.
pub const JACOBI_TOL: f64 = 1e-12;

/// Thin SVD `a = u · diag(sigma) · vᵀ` restricted to the numerical rank.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_columns(&self.sigma).matmul_t(&self.v)
    }

    /// Keeps the leading `k` triplets (or all of them when `k >= rank`).
    pub fn truncated(&self, k: usize) -> Svd {
        let r = k.min(self.rank());
        Svd {
            u: self.u.select_columns(0..r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.select_columns(0..r),
        }
    }
}

/// Rank-k factorization `u · diag(sigma) · vᵀ` with orthonormal factors and
/// nonincreasing `sigma`. Trailing singular values may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl Factorization {
    /// Takes the top `k` triplets of `svd`, zero-padding the spectrum and
    /// completing the bases when the SVD has fewer than `k` triplets.
    /// `k` is capped at `min(rows, cols)` of the factored matrix.
    pub fn from_svd(svd: &Svd, k: usize) -> Factorization {
        let k = k.min(svd.u.rows()).min(svd.v.rows());
        let t = svd.truncated(k);
        let mut sigma = t.sigma;
        sigma.resize(k, 0.0);
        Factorization {
            u: complete_basis(&t.u, k),
            sigma,
            v: complete_basis(&t.v, k),
        }
    }

    /// The all-zero rank-k factorization of an `m x n` matrix.
    pub fn zero(m: usize, n: usize, k: usize) -> Factorization {
        let k = k.min(m).min(n);
        Factorization {
            u: complete_basis(&DenseMatrix::zeros(m, 0), k),
            sigma: vec![0.0; k],
            v: complete_basis(&DenseMatrix::zeros(n, 0), k),
        }
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.u.scale_columns(&self.sigma).matmul_t(&self.v)
    }

    /// The same factorization of the transposed matrix.
    pub fn transposed(self) -> Factorization {
        Factorization {
            u: self.v,
            sigma: self.sigma,
            v: self.u,
        }
    }

    /// Number of strictly positive singular values.
    pub fn effective_rank(&self) -> usize {
        self.sigma.iter().filter(|s| **s > 0.0).count()
    }
}

/// Shape summary that goes into JSON reports.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

/// Thin SVD of a nonempty matrix.
///
/// Singular values at or below `max(m, n) * eps * σ_max` are dropped, so the
/// returned factors have exactly `rank` orthonormal columns. The zero matrix
/// has rank 0.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    check_finite(a)?;
    if a.is_empty() {
        return Err(Error::InvalidParameter("svd of an empty matrix".into()));
    }
    if a.rows() < a.cols() {
        let s = jacobi_tall(&a.transpose())?;
        return Ok(Svd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        });
    }
    jacobi_tall(a)
}

/// All `min(m, n)` singular values in nonincreasing order, zeros included.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let mut s = svd(a)?.sigma;
    s.resize(a.rows().min(a.cols()), 0.0);
    Ok(s)
}

fn jacobi_tall(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let fro = a.frobenius_norm();
    // Columns whose squared norm is below this are indistinguishable from
    // rounding noise; rotating them only risks stalling convergence.
    let negligible = (f64::EPSILON * fro).powi(2);
    let mut w = a.columns();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<(usize, f64)> = w.iter().map(|c| dot(c, c).sqrt()).enumerate().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let sigma_max = order.first().map_or(0.0, |x| x.1);
    let floor = m.max(n) as f64 * f64::EPSILON * sigma_max;

    let mut sigma = Vec::new();
    let mut u_cols = Vec::new();
    let mut v_cols = Vec::new();
    for (j, s) in order {
        if s <= floor || s == 0.0 {
            break;
        }
        sigma.push(s);
        u_cols.push(w[j].iter().map(|x| x / s).collect::<Vec<_>>());
        v_cols.push(v[j].clone());
    }
    Ok(Svd {
        u: DenseMatrix::from_columns(m, &u_cols),
        sigma,
        v: DenseMatrix::from_columns(n, &v_cols),
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Default pseudo-inverse cutoff `max(m, n) * eps * σ_max`.
pub fn default_pinv_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Moore-Penrose pseudo-inverse `V Σ† Uᵀ`; singular values `<= tol` are
/// treated as zero. `tol = 0` selects [`default_pinv_tol`].
pub fn pinv(a: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("pinv tolerance {tol} < 0")));
    }
    let s = svd(a)?;
    Ok(pinv_from_svd(&s, a.rows(), a.cols(), tol))
}

fn pinv_from_svd(s: &Svd, rows: usize, cols: usize, tol: f64) -> DenseMatrix {
    let sigma_max = s.sigma.first().copied().unwrap_or(0.0);
    let tol = if tol == 0.0 {
        default_pinv_tol(rows, cols, sigma_max)
    } else {
        tol
    };
    let inv: Vec<f64> = s.sigma.iter().map(|&x| if x > tol { 1.0 / x } else { 0.0 }).collect();
    s.v.scale_columns(&inv).matmul_t(&s.u)
}

/// Best rank-k approximation `[a]_k` in the Frobenius norm.
///
/// When `σ_k = σ_{k+1}` the truncation is not unique; the first `k` triplets
/// in the SVD's order are kept.
pub fn truncate_rank_k(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank k must be at least 1".into()));
    }
    let s = svd(a)?;
    if k >= s.rank() {
        return Ok(a.clone());
    }
    Ok(s.truncated(k).reconstruct())
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.frobenius_norm()
}

/// Largest singular value; zero for the zero matrix.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(svd(a)?.sigma.first().copied().unwrap_or(0.0))
}
