//! Differentially private factorization.
//!
//! Sketches are accumulated without noise; Gaussian noise is added once, at
//! factorization time, using scales from [`calibrate`]. Privacy rests on the
//! formulas and the sensitivity premise checked by [`sensitivity_audit`];
//! nothing here tests privacy statistically.

mod calibration;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::Serialize;

pub use calibration::{
    calibrate, gaussian_mechanism_std, rho, rho2, sigma_min, LogBase, NoiseScales, PrivacyLevel, PrivacyParams,
};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lrf::{self, LrfReport};
use crate::rng::{self, Role};
use crate::sketch::SketchOperator;
use crate::stream::{Layout, Mode, SketchState};

/// I.i.d. `N(0, std²)` entries, deterministic in `seed`.
pub fn gaussian_noise_matrix(rows: usize, cols: usize, std: f64, seed: u64) -> Result<DenseMatrix> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise std {std} must be finite and >= 0"
        )));
    }
    if std == 0.0 {
        return Ok(DenseMatrix::zeros(rows, cols));
    }
    let mut g = rng::StreamRng::seed_from_u64(seed);
    let data = (0..rows * cols)
        .map(|_| std * g.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data)
}

fn add_noise(base: &DenseMatrix, std: f64, seed: u64) -> Result<DenseMatrix> {
    if std == 0.0 {
        return Ok(base.clone());
    }
    Ok(base.add(&gaussian_noise_matrix(base.rows(), base.cols(), std, seed)?))
}

fn scales_for(state: &SketchState, mode: Mode) -> Result<NoiseScales> {
    if state.mode() != mode {
        return Err(Error::InvalidParameter(format!(
            "expected a {mode:?} state, found {:?}",
            state.mode()
        )));
    }
    state
        .noise_scales()
        .ok_or_else(|| Error::InvalidParameter("state carries no privacy parameters".into()))
}

/// Rank-k factorization of a `Priv2` state: `Y = AΦ + N₁`, `Z = SA + N₂`
/// with both noise matrices `N(0, ρ²)`, then the one-sided pipeline.
pub fn private_frobenius_lrf(state: &SketchState, k: usize, seed: u64) -> Result<LrfReport> {
    let scales = scales_for(state, Mode::Priv2)?;
    let Layout::OneSided(s) = state.layout() else {
        unreachable!("Priv2 states are one-sided")
    };
    let y = add_noise(&s.y, scales.rho, rng::derive(seed, Role::Noise1))?;
    let z = add_noise(&s.z, scales.rho, rng::derive(seed, Role::Noise2))?;
    let d = state.dims();
    if k == 0 || k > d.t.min(d.v) {
        return Err(Error::InvalidParameter(format!("rank k = {k} outside [1, min(t, v)]")));
    }
    let mut report = lrf::factorize_one_sided(&y, &z, &s.s, k)?;
    report.noise = Some(scales);
    Ok(report)
}

/// Rank-k factorization of a `Priv1` state: `Y_c = ÂΦ̂` as streamed,
/// `Y_r = ΨÂ + N₁` (`N(0, ρ₁²)`), `Z = SÂTᵀ + N₂` (`N(0, ρ₂²)`), then the
/// two-sided pipeline, mapped back to `m x n`.
pub fn private_space_optimal_lrf(state: &SketchState, k: usize, seed: u64) -> Result<LrfReport> {
    let scales = scales_for(state, Mode::Priv1)?;
    let Layout::TwoSided(s) = state.layout() else {
        unreachable!("Priv1 states are two-sided")
    };
    let y_r = add_noise(&s.y_r, scales.rho1, rng::derive(seed, Role::Noise1))?;
    let z = add_noise(&s.z, scales.rho2, rng::derive(seed, Role::Noise2))?;
    let mut report = lrf::factorize_state_two_sided(state, &s.y_c, &y_r, &z, k)?;
    report.noise = Some(scales);
    Ok(report)
}

/// Reference size of the additive error for `Priv2`:
/// `((1+α)√(km) + √(n(1+α)α⁻³(k + α⁻¹))) · √(ln(1/δ)) / ε`.
pub fn frobenius_envelope(m: usize, n: usize, k: usize, p: &PrivacyParams) -> f64 {
    let (m, n, k, a) = (m as f64, n as f64, k as f64, p.alpha);
    let shape = (1.0 + a) * (k * m).sqrt() + (n * (1.0 + a) / a.powi(3) * (k + 1.0 / a)).sqrt();
    shape * (1.0 / p.delta).ln().sqrt() / p.epsilon
}

/// Tail multiplier `ℓ` for `‖N₂‖_F` in [`space_optimal_envelope`].
pub const ENVELOPE_TAIL: f64 = 2.0;

/// Reference size of the additive error for `Priv1`:
/// `σ_min √(m+n) + ρ₂ v ℓ + ρ₁ √(k(m+n))`.
pub fn space_optimal_envelope(m: usize, n: usize, k: usize, v: usize, s: &NoiseScales) -> f64 {
    let mn = (m + n) as f64;
    s.sigma_min * mn.sqrt() + s.rho2 * v as f64 * ENVELOPE_TAIL + s.rho1 * (k as f64 * mn).sqrt()
}

/// A sketch map whose sensitivity is audited.
#[derive(Debug, Clone)]
pub enum Probe {
    /// `‖S E‖_F`.
    Left(SketchOperator),
    /// `‖E Φ‖_F` for `Φ = opᵀ`.
    Right(SketchOperator),
    /// `‖S E Tᵀ‖_F`.
    TwoSided(SketchOperator, SketchOperator),
}

impl Probe {
    fn dims(&self) -> (usize, usize) {
        match self {
            Probe::Left(s) => (s.in_dim(), 0),
            Probe::Right(t) => (0, t.in_dim()),
            Probe::TwoSided(s, t) => (s.in_dim(), t.in_dim()),
        }
    }

    /// Sketched norm of `e`, zero-padded (`(E | 0)` and below) to the
    /// operator's input dimensions.
    fn norm(&self, e: &DenseMatrix) -> Result<f64> {
        let (r, c) = self.dims();
        let padded = pad(e, r.max(e.rows()), c.max(e.cols()));
        let out = match self {
            Probe::Left(s) => s.apply_left(&padded)?,
            Probe::Right(t) => t.apply_right(&padded)?,
            Probe::TwoSided(s, t) => t.apply_right(&s.apply_left(&padded)?)?,
        };
        Ok(out.frobenius_norm())
    }
}

fn pad(e: &DenseMatrix, rows: usize, cols: usize) -> DenseMatrix {
    if e.shape() == (rows, cols) {
        return e.clone();
    }
    DenseMatrix::from_fn(
        rows,
        cols,
        |i, j| if i < e.rows() && j < e.cols() { e.get(i, j) } else { 0.0 },
    )
    .expect("finite")
}

/// Squared-norm ceiling margin used for flagging.
pub const AUDIT_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeStats {
    pub name: String,
    pub max: f64,
    pub p95: f64,
    pub max_sq: f64,
    pub p95_sq: f64,
    pub mean_sq: f64,
    /// `p95² <= 1 + α`.
    pub p95_within: bool,
    /// Trials with squared norm above `(1 + α)(1 + margin)`.
    pub hard_failures: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub level: PrivacyLevel,
    pub alpha: f64,
    pub trials: usize,
    pub rows: usize,
    pub cols: usize,
    pub probes: Vec<ProbeStats>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.probes.iter().all(|p| p.p95_within && p.hard_failures == 0)
    }
}

/// A random neighbouring difference of an `rows x cols` matrix: unit
/// Frobenius norm (`Priv2`), or `uvᵀ` with unit `u`, `v` (`Priv1`).
pub fn random_difference<R: Rng>(level: PrivacyLevel, rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let mut unit = |len: usize| loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        }
    };
    match level {
        PrivacyLevel::Priv2 => DenseMatrix::new(rows, cols, unit(rows * cols)).expect("finite"),
        PrivacyLevel::Priv1 => {
            let u = unit(rows);
            let v = unit(cols);
            DenseMatrix::from_fn(rows, cols, |i, j| u[i] * v[j]).expect("finite")
        }
    }
}

/// Draws `trials` neighbouring differences `E` of an `rows x cols` matrix and
/// records their sketched norms under each probe.
///
/// This checks the ℓ₂-sensitivity premise of the Gaussian mechanism. It does
/// not prove privacy.
pub fn sensitivity_audit(
    level: PrivacyLevel,
    alpha: f64,
    rows: usize,
    cols: usize,
    probes: &[(String, Probe)],
    trials: usize,
    seed: u64,
) -> Result<AuditReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("audit needs at least one trial".into()));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter("audit matrix must be nonempty".into()));
    }
    for (name, p) in probes {
        let (r, c) = p.dims();
        if r != 0 && r < rows || c != 0 && c < cols {
            return Err(Error::DimensionMismatch(format!(
                "probe `{name}` smaller than the audited matrix"
            )));
        }
    }
    let mut g = rng::stream(seed, Role::Audit);
    let mut norms = vec![Vec::with_capacity(trials); probes.len()];
    for _ in 0..trials {
        let e = random_difference(level, rows, cols, &mut g);
        for (slot, (_, p)) in norms.iter_mut().zip(probes) {
            slot.push(p.norm(&e)?);
        }
    }
    let bound = 1.0 + alpha;
    let hard = bound * (1.0 + AUDIT_MARGIN);
    let stats = probes
        .iter()
        .zip(norms)
        .map(|((name, _), mut xs)| {
            xs.sort_by(f64::total_cmp);
            let max = *xs.last().expect("trials >= 1");
            let p95 = xs[((0.95 * trials as f64).ceil() as usize).clamp(1, trials) - 1];
            let mean_sq = xs.iter().map(|x| x * x).sum::<f64>() / trials as f64;
            let hard_failures = xs.iter().filter(|x| *x * *x > hard).count();
            ProbeStats {
                name: name.clone(),
                max,
                p95,
                max_sq: max * max,
                p95_sq: p95 * p95,
                mean_sq,
                p95_within: p95 * p95 <= bound,
                hard_failures,
                flagged: max * max > hard,
            }
        })
        .collect();
    Ok(AuditReport {
        level,
        alpha,
        trials,
        rows,
        cols,
        probes: stats,
    })
}

/// Probes built from a state's own operators: `Priv2` audits `SE` and `EΦ`;
/// `Priv1` audits `Ψ(E | 0)` and `S(E | 0)Tᵀ` in work coordinates.
pub fn state_probes(state: &SketchState) -> Vec<(String, Probe)> {
    match state.layout() {
        Layout::OneSided(s) => vec![
            ("S.E".into(), Probe::Left(s.s.clone())),
            ("E.Phi".into(), Probe::Right(s.phi.clone())),
        ],
        Layout::TwoSided(s) => vec![
            ("Psi.E".into(), Probe::Left(s.psi.clone())),
            ("S.E.T'".into(), Probe::TwoSided(s.s.clone(), s.t_op.clone())),
        ],
    }
}

/// Total budget of `ℓ` runs of an `(ε₀, δ₀)` mechanism:
/// `ε = √(2ℓ ln(1/δ′)) ε₀ + 2ℓ ε₀²`, `δ = ℓ δ₀ + δ′`.
pub fn compose(budgets: &[(f64, f64)], delta_prime: f64) -> Result<(f64, f64)> {
    let Some(&(e0, d0)) = budgets.first() else {
        return Err(Error::InvalidParameter("no budgets to compose".into()));
    };
    if budgets.iter().any(|&b| b != (e0, d0)) {
        return Err(Error::InvalidParameter(
            "composition is only defined here for identical budgets".into(),
        ));
    }
    if !(e0 >= 0.0 && e0.is_finite()) || !(0.0..1.0).contains(&d0) {
        return Err(Error::InvalidParameter(format!("invalid budget ({e0}, {d0})")));
    }
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta' = {delta_prime} outside (0, 1)"
        )));
    }
    let l = budgets.len() as f64;
    let eps = (2.0 * l * (1.0 / delta_prime).ln()).sqrt() * e0 + 2.0 * l * e0 * e0;
    Ok((eps, l * d0 + delta_prime))
}
