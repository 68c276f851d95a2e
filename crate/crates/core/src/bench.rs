//! Synthetic data, stream emission and the experiment harness.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{self, NoiseScales, PrivacyParams};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lrf::{self, LrfReport};
use crate::rng::{self, Role, StreamRng};
use crate::sketch::{SketchKind, DEFAULT_CALIBRATION};
use crate::stream::{self, Mode, SketchState, StateConfig, TurnstileUpdate};

/// Noise level used when none is given.
pub const DEFAULT_NOISE_LEVEL: f64 = 1.0;
/// Largest `m·n` the oracle will materialize by default.
pub const DEFAULT_ORACLE_CAP: usize = 1_000_000;
/// Residual (relative to `‖A‖_F`) that counts as exact recovery when the
/// optimal residual is zero.
pub const EXACT_RECOVERY_TOL: f64 = 1e-6;

/// `A = G₁G₂ᵀ + noise_level·G₃` with standard Gaussian `G₁` (`m x r`), `G₂`
/// (`n x r`) and `G₃` (`m x n`), generated row by row so that rows can be
/// streamed without holding `A`.
#[derive(Debug, Clone)]
pub struct LowRankSource {
    m: usize,
    n: usize,
    noise_level: f64,
    g1: DenseMatrix,
    g2: DenseMatrix,
    noise_seed: u64,
}

impl LowRankSource {
    pub fn new(m: usize, n: usize, r: usize, noise_level: f64, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("matrix dimensions must be positive".into()));
        }
        if r > m.min(n) {
            return Err(Error::InvalidParameter(format!(
                "rank {r} exceeds min(m, n) = {}",
                m.min(n)
            )));
        }
        if !(noise_level >= 0.0 && noise_level.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise level {noise_level} must be >= 0"
            )));
        }
        let mut g = rng::stream(seed, Role::Data);
        let mut gauss = |rows, cols| {
            let data = (0..rows * cols).map(|_| g.sample::<f64, _>(StandardNormal)).collect();
            DenseMatrix::new(rows, cols, data)
        };
        let g1 = gauss(m, r)?;
        let g2 = gauss(n, r)?;
        Ok(LowRankSource {
            m,
            n,
            noise_level,
            g1,
            g2,
            noise_seed: rng::derive(seed, Role::Rows),
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let gi = self.g1.row(i);
        let mut out: Vec<f64> = (0..self.n).map(|j| crate::linalg::dot(gi, self.g2.row(j))).collect();
        if self.noise_level > 0.0 {
            let mut g = StreamRng::seed_from_u64(rng::split(self.noise_seed, i as u64));
            for x in &mut out {
                *x += self.noise_level * g.sample::<f64, _>(StandardNormal);
            }
        }
        out
    }

    pub fn materialize(&self) -> DenseMatrix {
        let data = (0..self.m).flat_map(|i| self.row(i)).collect();
        DenseMatrix::new(self.m, self.n, data).expect("finite entries")
    }
}

/// Materialized [`LowRankSource`].
pub fn gen_lowrank_plus_noise(m: usize, n: usize, r: usize, noise_level: f64, seed: u64) -> Result<DenseMatrix> {
    Ok(LowRankSource::new(m, n, r, noise_level, seed)?.materialize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    #[default]
    RowMajor,
    Random,
}

impl std::str::FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row-major" | "row_major" => Ok(Order::RowMajor),
            "random" => Ok(Order::Random),
            other => Err(Error::InvalidParameter(format!("unknown order `{other}`"))),
        }
    }
}

/// One update per nonzero entry of `a`, in the requested order.
pub fn matrix_updates(a: &DenseMatrix, order: Order, seed: u64) -> Vec<TurnstileUpdate> {
    let mut ups: Vec<TurnstileUpdate> = (0..a.rows())
        .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let x = a.get(i, j);
            (x != 0.0).then(|| TurnstileUpdate::new(i, j, x))
        })
        .collect();
    if order == Order::Random {
        ups.shuffle(&mut rng::stream(seed, Role::Order));
    }
    ups
}

/// Writes `a` as a stream file; returns the number of updates written.
pub fn emit_stream(a: &DenseMatrix, order: Order, path: impl AsRef<Path>, seed: u64) -> Result<usize> {
    let ups = matrix_updates(a, order, seed);
    let mut w = BufWriter::new(File::create(path)?);
    stream::io_write(&mut w, a.rows(), a.cols(), &ups)?;
    w.flush()?;
    Ok(ups.len())
}

/// Success criteria checked by [`run_experiment`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum fraction of ratio-defined trials with ratio `<= 1 + α`.
    pub min_success_rate: Option<f64>,
    /// Minimum fraction of zero-optimum trials recovered exactly.
    pub min_exact_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub mode: Mode,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub regression_kind: SketchKind,
    pub affine_kind: SketchKind,
    pub c: f64,
    /// Rank of the planted signal; defaults to `k`.
    pub data_rank: Option<usize>,
    pub noise_level: f64,
    pub dims: Option<(usize, usize)>,
    pub oracle: bool,
    pub oracle_cap: usize,
    /// Record wall-clock timings. Off by default so that summaries are
    /// byte-reproducible.
    pub timing: bool,
    pub thresholds: Thresholds,
}

impl ExperimentConfig {
    pub fn new(m: usize, n: usize, k: usize, alpha: f64) -> Self {
        ExperimentConfig {
            m,
            n,
            k,
            alpha,
            mode: Mode::NonPrivate,
            epsilon: None,
            delta: None,
            trials: 1,
            seed: 0,
            regression_kind: SketchKind::CountSketch,
            affine_kind: SketchKind::CountSketch,
            c: DEFAULT_CALIBRATION,
            data_rank: None,
            noise_level: DEFAULT_NOISE_LEVEL,
            dims: None,
            oracle: true,
            oracle_cap: DEFAULT_ORACLE_CAP,
            timing: false,
            thresholds: Thresholds::default(),
        }
    }

    pub fn privacy(&self) -> Result<Option<PrivacyParams>> {
        let Some(level) = self.mode.level() else {
            if self.epsilon.is_some() || self.delta.is_some() {
                return Err(Error::InvalidParameter(
                    "epsilon/delta given for a non-private run".into(),
                ));
            }
            return Ok(None);
        };
        let (Some(eps), Some(delta)) = (self.epsilon, self.delta) else {
            return Err(Error::InvalidParameter(format!(
                "{:?} needs epsilon and delta",
                self.mode
            )));
        };
        PrivacyParams::new(eps, delta, level, self.alpha).map(Some)
    }

    pub fn state_config(&self, seed: u64) -> Result<StateConfig> {
        let mut cfg = StateConfig::new(self.m, self.n, self.k, self.alpha)
            .seed(seed)
            .kinds(self.regression_kind, self.affine_kind)
            .calibration(self.c);
        if let Some(p) = self.privacy()? {
            cfg = cfg.private(p);
        }
        if let Some((t, v)) = self.dims {
            cfg = cfg.dims(t, v);
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.privacy()?;
        if self.oracle && self.m.saturating_mul(self.n) > self.oracle_cap {
            return Err(Error::OracleTooLarge {
                cells: self.m.saturating_mul(self.n),
                cap: self.oracle_cap,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub a_fro: Option<f64>,
    pub residual_fro: Option<f64>,
    pub oracle_residual_fro: Option<f64>,
    pub ratio: Option<f64>,
    /// `max(0, residual − (1 + α)·oracle)`.
    pub additive_excess: Option<f64>,
    pub effective_rank: usize,
    pub degenerate: bool,
    pub update_cost_ns: Option<f64>,
    pub factorize_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub update_ns_p50: f64,
    pub update_ns_p95: f64,
    pub factorize_ms_p50: f64,
    pub factorize_ms_p95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub config: ExperimentConfig,
    pub dims: (usize, usize),
    pub noise: Option<NoiseScales>,
    /// Reference additive-error size for the private modes.
    pub envelope: Option<f64>,
    pub trials: usize,
    /// Trials whose ratio is defined (optimal residual `>= 1e-12`).
    pub ratio_trials: usize,
    pub success_rate: Option<f64>,
    /// Trials with zero optimal residual.
    pub exact_trials: usize,
    pub exact_rate: Option<f64>,
    pub median_ratio: Option<f64>,
    pub median_residual: Option<f64>,
    pub median_additive_excess: Option<f64>,
    pub timing: Option<Timing>,
    pub thresholds_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Factorization appropriate to the state's mode.
pub fn factorize_state(state: &SketchState, k: usize, noise_seed: u64) -> Result<LrfReport> {
    match state.mode() {
        Mode::NonPrivate => lrf::factorize(state, k),
        Mode::Priv1 => dp::private_space_optimal_lrf(state, k, noise_seed),
        Mode::Priv2 => dp::private_frobenius_lrf(state, k, noise_seed),
    }
}

/// Runs one trial: generate, stream row by row, factorize, compare.
pub fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialRecord> {
    let source = LowRankSource::new(
        cfg.m,
        cfg.n,
        cfg.data_rank.unwrap_or(cfg.k),
        cfg.noise_level,
        rng::derive(seed, Role::Data),
    )?;
    let mut state = SketchState::init(&cfg.state_config(seed)?)?;
    let start = Instant::now();
    for i in 0..cfg.m {
        for (j, x) in source.row(i).into_iter().enumerate() {
            if x != 0.0 {
                state.ingest(TurnstileUpdate::new(i, j, x))?;
            }
        }
    }
    let ingest = start.elapsed();
    let mut report = factorize_state(&state, cfg.k, rng::derive(seed, Role::Noise1))?;
    let mut a_fro = None;
    if cfg.oracle {
        let a = source.materialize();
        a_fro = Some(a.frobenius_norm());
        report.evaluate(&a)?;
    }
    let additive_excess = report
        .residual_fro
        .zip(report.oracle_residual_fro)
        .map(|(r, o)| (r - (1.0 + cfg.alpha) * o).max(0.0));
    let updates = state.updates_seen().max(1) as f64;
    Ok(TrialRecord {
        seed,
        a_fro,
        residual_fro: report.residual_fro,
        oracle_residual_fro: report.oracle_residual_fro,
        ratio: report.ratio,
        additive_excess,
        effective_rank: report.effective_rank,
        degenerate: report.degenerate,
        update_cost_ns: cfg.timing.then_some(ingest.as_secs_f64() * 1e9 / updates),
        factorize_ms: cfg.timing.then_some(report.wall_time.as_secs_f64() * 1e3),
    })
}

/// Median of `xs` (mean of the two middle values for even lengths).
pub fn median(xs: &[f64]) -> Option<f64> {
    quantile(xs, 0.5)
}

/// Linear-interpolated quantile.
pub fn quantile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Runs `cfg.trials` independent trials in parallel (per-trial seeds split
/// from `cfg.seed`) and summarizes them in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let probe = SketchState::init(&cfg.state_config(cfg.seed)?)?;
    let dims = probe.dims();
    let noise = probe.noise_scales();
    drop(probe);

    let mut records = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, rng::split(cfg.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| r.seed);

    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let bound = 1.0 + cfg.alpha;
    let success_rate =
        (!ratios.is_empty()).then(|| ratios.iter().filter(|&&x| x <= bound).count() as f64 / ratios.len() as f64);
    let exact: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.oracle_residual_fro.is_some() && r.ratio.is_none())
        .collect();
    let exact_rate = (!exact.is_empty()).then(|| {
        let ok = exact
            .iter()
            .filter(|r| r.residual_fro.unwrap() <= EXACT_RECOVERY_TOL * r.a_fro.unwrap())
            .count();
        ok as f64 / exact.len() as f64
    });
    let residuals: Vec<f64> = records.iter().filter_map(|r| r.residual_fro).collect();
    let excess: Vec<f64> = records.iter().filter_map(|r| r.additive_excess).collect();
    let timing = cfg.timing.then(|| {
        let u: Vec<f64> = records.iter().filter_map(|r| r.update_cost_ns).collect();
        let f: Vec<f64> = records.iter().filter_map(|r| r.factorize_ms).collect();
        Timing {
            update_ns_p50: quantile(&u, 0.5).unwrap_or(0.0),
            update_ns_p95: quantile(&u, 0.95).unwrap_or(0.0),
            factorize_ms_p50: quantile(&f, 0.5).unwrap_or(0.0),
            factorize_ms_p95: quantile(&f, 0.95).unwrap_or(0.0),
        }
    });
    let envelope = match (cfg.privacy()?, noise) {
        (Some(p), Some(s)) => Some(match p.level {
            dp::PrivacyLevel::Priv2 => dp::frobenius_envelope(cfg.m, cfg.n, cfg.k, &p),
            dp::PrivacyLevel::Priv1 => dp::space_optimal_envelope(cfg.m, cfg.n, cfg.k, dims.v, &s),
        }),
        _ => None,
    };
    let meets = |min: Option<f64>, got: Option<f64>| min.is_none_or(|m| got.is_some_and(|g| g >= m));
    let thresholds_met =
        meets(cfg.thresholds.min_success_rate, success_rate) && meets(cfg.thresholds.min_exact_rate, exact_rate);
    let summary = Summary {
        schema: 1,
        config: cfg.clone(),
        dims: (dims.t, dims.v),
        noise,
        envelope,
        trials: records.len(),
        ratio_trials: ratios.len(),
        success_rate,
        exact_trials: exact.len(),
        exact_rate,
        median_ratio: median(&ratios),
        median_residual: median(&residuals),
        median_additive_excess: median(&excess),
        timing,
        thresholds_met,
    };
    Ok(ExperimentReport { summary, records })
}
