//! Rank-k reconstruction from sketches.
//!
//! [`factorize`] dispatches on the state's layout: the two-sided pipeline for
//! `(Y_c, Y_r, Z)` states and the one-sided pipeline for `(Y, Z)` states. No
//! noise is added here; see [`crate::dp`] for the private variants.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::dp::NoiseScales;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, Factorization, Svd};
use crate::sketch::SketchOperator;
use crate::stream::{Layout, Mode, SketchState};

/// Oracle residuals below this are treated as zero and the ratio is left
/// undefined.
pub const RATIO_FLOOR: f64 = 1e-12;

/// A factorization plus, once [`evaluate`](LrfReport::evaluate)d against the
/// true matrix, its residual and the optimal rank-k residual.
#[derive(Debug, Clone)]
pub struct LrfReport {
    pub factorization: Factorization,
    pub residual_fro: Option<f64>,
    pub oracle_residual_fro: Option<f64>,
    pub ratio: Option<f64>,
    /// Rank of the reconstructed core before zero-padding to `k`.
    pub effective_rank: usize,
    /// Set when a sketch was identically zero.
    pub degenerate: bool,
    pub wall_time: Duration,
    pub noise: Option<NoiseScales>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub k: usize,
    pub residual_fro: Option<f64>,
    pub oracle_residual_fro: Option<f64>,
    pub ratio: Option<f64>,
    pub effective_rank: usize,
    pub degenerate: bool,
    pub wall_time_ms: f64,
    pub noise: Option<NoiseScales>,
}

impl LrfReport {
    fn new(factorization: Factorization, effective_rank: usize, degenerate: bool) -> Self {
        LrfReport {
            factorization,
            residual_fro: None,
            oracle_residual_fro: None,
            ratio: None,
            effective_rank,
            degenerate,
            wall_time: Duration::ZERO,
            noise: None,
        }
    }

    /// Fills the residual `‖a − UΣVᵀ‖_F`, the optimum `‖a − [a]_k‖_F` and
    /// their ratio. Requires the materialized matrix.
    pub fn evaluate(&mut self, a: &DenseMatrix) -> Result<()> {
        let f = &self.factorization;
        if a.shape() != (f.u.rows(), f.v.rows()) {
            return Err(Error::DimensionMismatch(format!(
                "report is for {}x{}, matrix is {}x{}",
                f.u.rows(),
                f.v.rows(),
                a.rows(),
                a.cols()
            )));
        }
        let residual = a.sub(&f.reconstruct()).frobenius_norm();
        let oracle = optimal_residual(a, f.k().max(1))?;
        self.residual_fro = Some(residual);
        self.oracle_residual_fro = Some(oracle);
        self.ratio = (oracle >= RATIO_FLOOR).then(|| residual / oracle);
        Ok(())
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            k: self.factorization.k(),
            residual_fro: self.residual_fro,
            oracle_residual_fro: self.oracle_residual_fro,
            ratio: self.ratio,
            effective_rank: self.effective_rank,
            degenerate: self.degenerate,
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
            noise: self.noise,
        }
    }
}

/// `‖a − [a]_k‖_F`, from the tail of the spectrum.
pub fn optimal_residual(a: &DenseMatrix, k: usize) -> Result<f64> {
    let s = linalg::singular_values(a)?;
    Ok(s.iter().skip(k).map(|x| x * x).sum::<f64>().sqrt())
}

const BASIS_TOL: f64 = 1e-8;

fn check_orthonormal_columns(q: &DenseMatrix, what: &str) -> Result<()> {
    let gram = q.t_matmul(q);
    let err = gram.sub(&DenseMatrix::identity(q.cols())).max_abs();
    if err > BASIS_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what} is not orthonormal (max |QᵀQ − I| = {err:e})"
        )));
    }
    Ok(())
}

/// `[oᵀz]_k`, the minimizer of `‖oX − z‖_F` over rank-`k` `X` when `o` has
/// orthonormal columns.
pub fn rank_k_under_basis(o: &DenseMatrix, z: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if o.rows() != z.rows() {
        return Err(Error::DimensionMismatch("basis and target row counts differ".into()));
    }
    check_orthonormal_columns(o, "basis")?;
    truncate(&o.t_matmul(z), k)
}

/// `[cᵀ f rᵀ]_k`, the minimizer of `‖cXr − f‖_F` over rank-`k` `X` when `c`
/// has orthonormal columns and `r` orthonormal rows.
pub fn rank_k_between_bases(c: &DenseMatrix, r: &DenseMatrix, f: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if c.rows() != f.rows() || r.cols() != f.cols() {
        return Err(Error::DimensionMismatch("bases do not conform with target".into()));
    }
    check_orthonormal_columns(c, "column basis")?;
    check_orthonormal_columns(&r.transpose(), "row basis")?;
    truncate(&c.t_matmul(f).matmul_t(r), k)
}

fn truncate(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if a.is_empty() {
        if k == 0 {
            return Err(Error::InvalidParameter("rank k must be at least 1".into()));
        }
        return Ok(a.clone());
    }
    linalg::truncate_rank_k(a, k)
}

/// `(Φp)†(Φq)`, the minimizer of `‖Φ(pX − q)‖_F`.
pub fn sketched_regression(p: &DenseMatrix, q: &DenseMatrix, phi: &SketchOperator) -> Result<DenseMatrix> {
    if p.rows() != q.rows() {
        return Err(Error::DimensionMismatch(
            "regression design and target row counts differ".into(),
        ));
    }
    let sp = phi.apply_left(p)?;
    let sq = phi.apply_left(q)?;
    Ok(linalg::pinv(&sp, 0.0)?.matmul(&sq))
}

/// Factorization of the matrix streamed into `state`, without noise.
///
/// Under `Priv1` the augmented work matrix is factored and the result is
/// mapped back to the original `m x n` coordinates.
pub fn factorize(state: &SketchState, k: usize) -> Result<LrfReport> {
    match state.layout() {
        Layout::TwoSided(s) => factorize_state_two_sided(state, &s.y_c, &s.y_r, &s.z, k),
        Layout::OneSided(s) => {
            check_k(k, state)?;
            factorize_one_sided(&s.y, &s.z, &s.s, k)
        }
    }
}

fn check_k(k: usize, state: &SketchState) -> Result<()> {
    let d = state.dims();
    if k == 0 || k > d.t.min(d.v) {
        return Err(Error::InvalidParameter(format!(
            "rank k = {k} must lie in [1, min(t, v)] = [1, {}]",
            d.t.min(d.v)
        )));
    }
    Ok(())
}

/// Two-sided pipeline on the given sketch matrices, which must have the
/// shapes of `state`'s (possibly after noise was added to them).
pub(crate) fn factorize_state_two_sided(
    state: &SketchState,
    y_c: &DenseMatrix,
    y_r: &DenseMatrix,
    z: &DenseMatrix,
    k: usize,
) -> Result<LrfReport> {
    check_k(k, state)?;
    let Layout::TwoSided(ops) = state.layout() else {
        return Err(Error::InvalidParameter("state does not hold two-sided sketches".into()));
    };
    let start = Instant::now();
    let mut report = factorize_two_sided(y_c, y_r, z, &ops.s, &ops.t_op, k)?;
    if state.mode() == Mode::Priv1 {
        let orig_cols = if state.is_transposed() { state.m() } else { state.n() };
        let f = restrict_columns(&report.factorization, orig_cols, k)?;
        report.factorization = if state.is_transposed() { f.transposed() } else { f };
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Drops the trailing rows of `V` (augmentation columns) and re-factors
/// `U Σ V_topᵀ` so the factors stay orthonormal.
fn restrict_columns(f: &Factorization, cols: usize, k: usize) -> Result<Factorization> {
    let v_top = f.v.select_rows(0..cols);
    let b = v_top.scale_columns(&f.sigma).transpose();
    let s = linalg::svd(&b)?;
    let lifted = Svd {
        u: f.u.matmul(&s.u),
        sigma: s.sigma,
        v: s.v,
    };
    Ok(Factorization::from_svd(&lifted, k))
}

/// Reconstruction from `Y_c = AΦ`, `Y_r = ΨA`, `Z = SATᵀ`:
///
/// 1. `U` orthonormal basis of `col(Y_c)`, `V` of `row(Y_r)`;
/// 2. `SU = Ũs Σ̃s Ṽsᵀ`, `VTᵀ = Ũt Σ̃t Ṽtᵀ`;
/// 3. `X̃ = Ṽs Σ̃s† [Ũsᵀ Z Ṽt]_k Σ̃t† Ũtᵀ = U′ Σ′ V′ᵀ`;
/// 4. output `(U U′, Σ′, Vᵀ V′)`.
pub fn factorize_two_sided(
    y_c: &DenseMatrix,
    y_r: &DenseMatrix,
    z: &DenseMatrix,
    s: &SketchOperator,
    t_op: &SketchOperator,
    k: usize,
) -> Result<LrfReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank k must be at least 1".into()));
    }
    let start = Instant::now();
    let (m, n) = (y_c.rows(), y_r.cols());
    if z.shape() != (s.out_dim(), t_op.out_dim()) || s.in_dim() != m || t_op.in_dim() != n {
        return Err(Error::DimensionMismatch("sketch shapes do not match operators".into()));
    }
    let zero = |degenerate| LrfReport::new(Factorization::zero(m, n, k), 0, degenerate);
    if y_c.max_abs() == 0.0 || y_r.max_abs() == 0.0 {
        let mut r = zero(true);
        r.wall_time = start.elapsed();
        return Ok(r);
    }
    let u = linalg::orthonormal_columns(y_c)?;
    let v = linalg::orthonormal_rows(y_r)?;
    let su = linalg::svd(&s.apply_left(&u)?)?;
    let vt = linalg::svd(&t_op.apply_right(&v)?)?;
    if su.rank() == 0 || vt.rank() == 0 {
        return Ok(zero(true));
    }
    // Ũsᵀ Z Ṽt, where Ṽt here is the right factor of VTᵀ (v x b).
    let inner = su.u.t_matmul(z).matmul(&vt.v);
    let core = if inner.max_abs() == 0.0 {
        inner
    } else {
        linalg::truncate_rank_k(&inner, k)?
    };
    let inv = |x: &[f64]| x.iter().map(|s| 1.0 / s).collect::<Vec<_>>();
    let x =
        su.v.matmul(&core.scale_rows(&inv(&su.sigma)).scale_columns(&inv(&vt.sigma)))
            .matmul_t(&vt.u);
    let xs = linalg::svd(&x)?;
    let effective_rank = xs.rank();
    let lifted = Svd {
        u: u.matmul(&xs.u),
        sigma: xs.sigma,
        v: v.t_matmul(&xs.v),
    };
    let mut report = LrfReport::new(Factorization::from_svd(&lifted, k), effective_rank, false);
    report.wall_time = start.elapsed();
    Ok(report)
}

/// One-sided reconstruction from `Y = AΦ` (`Φ` an `n x t` map) and `Z = SA`:
/// `U` orthonormal basis of `col(Y)`, `SU = Ũ Σ̃ Ṽᵀ`, output the SVD of
/// `U Ṽ Σ̃† [Ũᵀ Z]_k`.
pub fn factorize_one_sided(y: &DenseMatrix, z: &DenseMatrix, s: &SketchOperator, k: usize) -> Result<LrfReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank k must be at least 1".into()));
    }
    let start = Instant::now();
    let (m, n) = (y.rows(), z.cols());
    if s.in_dim() != m || z.rows() != s.out_dim() {
        return Err(Error::DimensionMismatch("sketch shapes do not match operator".into()));
    }
    let zero = |degenerate| LrfReport::new(Factorization::zero(m, n, k), 0, degenerate);
    if y.max_abs() == 0.0 || z.max_abs() == 0.0 {
        let mut r = zero(true);
        r.wall_time = start.elapsed();
        return Ok(r);
    }
    let u = linalg::orthonormal_columns(y)?;
    let su = linalg::svd(&s.apply_left(&u)?)?;
    if su.rank() == 0 {
        return Ok(zero(true));
    }
    let w = su.u.t_matmul(z);
    let core = if w.max_abs() == 0.0 {
        w
    } else {
        linalg::truncate_rank_k(&w, k)?
    };
    let inv: Vec<f64> = su.sigma.iter().map(|s| 1.0 / s).collect();
    let x = su.v.matmul(&core.scale_rows(&inv));
    let xs = linalg::svd(&x)?;
    let effective_rank = xs.rank();
    let lifted = Svd {
        u: u.matmul(&xs.u),
        sigma: xs.sigma,
        v: xs.v,
    };
    let mut report = LrfReport::new(Factorization::from_svd(&lifted, k), effective_rank, false);
    report.wall_time = start.elapsed();
    Ok(report)
}
