//! Turnstile ingestion into the sketch state.
//!
//! The state holds only the frozen operators and the running sketches; the
//! update history is never stored, so its footprint is
//! `O((m + n) t + v²)` scalars regardless of stream length.

mod io;

use serde::{Deserialize, Serialize};

pub(crate) use io::write_updates as io_write;
pub use io::{parse_stream, read_stream, write_stream, StreamReader};

use crate::dp::{self, NoiseScales, PrivacyLevel, PrivacyParams};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{self, Role};
use crate::sketch::{
    self, apply_update_two_sided, EmbeddingDims, Side, SketchKind, SketchOperator, DEFAULT_CALIBRATION,
};

/// One additive update `A[i, j] += delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnstileUpdate {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
}

impl TurnstileUpdate {
    pub fn new(i: usize, j: usize, delta: f64) -> Self {
        TurnstileUpdate { i, j, delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NonPrivate,
    Priv1,
    Priv2,
}

impl Mode {
    pub fn level(self) -> Option<PrivacyLevel> {
        match self {
            Mode::NonPrivate => None,
            Mode::Priv1 => Some(PrivacyLevel::Priv1),
            Mode::Priv2 => Some(PrivacyLevel::Priv2),
        }
    }
}

impl From<PrivacyLevel> for Mode {
    fn from(level: PrivacyLevel) -> Self {
        match level {
            PrivacyLevel::Priv1 => Mode::Priv1,
            PrivacyLevel::Priv2 => Mode::Priv2,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nonprivate" | "non_private" => Ok(Mode::NonPrivate),
            "priv1" => Ok(Mode::Priv1),
            "priv2" => Ok(Mode::Priv2),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// Everything needed to build a [`SketchState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mode: Mode,
    pub privacy: Option<PrivacyParams>,
    /// Kind used for the regression embeddings `Φ` and `Ψ`.
    pub regression_kind: SketchKind,
    /// Kind used for the affine embeddings `S` and `T`.
    pub affine_kind: SketchKind,
    pub c: f64,
    /// Explicit sketch sizes, bypassing the calibration formulas.
    pub dims: Option<EmbeddingDims>,
}

impl StateConfig {
    pub fn new(m: usize, n: usize, k: usize, alpha: f64) -> Self {
        StateConfig {
            m,
            n,
            k,
            alpha,
            seed: 0,
            mode: Mode::NonPrivate,
            privacy: None,
            regression_kind: SketchKind::CountSketch,
            affine_kind: SketchKind::CountSketch,
            c: DEFAULT_CALIBRATION,
            dims: None,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Sets privacy parameters and the matching mode.
    pub fn private(mut self, params: PrivacyParams) -> Self {
        self.mode = params.level.into();
        self.privacy = Some(params);
        self
    }

    pub fn kinds(mut self, regression: SketchKind, affine: SketchKind) -> Self {
        self.regression_kind = regression;
        self.affine_kind = affine;
        self
    }

    pub fn kind(self, kind: SketchKind) -> Self {
        self.kinds(kind, kind)
    }

    pub fn calibration(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn dims(mut self, t: usize, v: usize) -> Self {
        self.dims = Some(EmbeddingDims {
            t,
            v,
            constant_c: self.c,
        });
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.k == 0 {
            return Err(Error::InvalidParameter("m, n and k must all be at least 1".into()));
        }
        match (self.mode, &self.privacy) {
            (Mode::NonPrivate, Some(_)) => Err(Error::InvalidParameter(
                "privacy parameters supplied for a non-private state".into(),
            )),
            (Mode::NonPrivate, None) => Ok(()),
            (mode, None) => Err(Error::InvalidParameter(format!("{mode:?} requires privacy parameters"))),
            (mode, Some(p)) => {
                p.validate()?;
                if mode.level() != Some(p.level) {
                    return Err(Error::InvalidParameter(format!(
                        "mode {mode:?} inconsistent with privacy level {:?}",
                        p.level
                    )));
                }
                if (p.alpha - self.alpha).abs() > 0.0 {
                    return Err(Error::InvalidParameter("privacy alpha differs from state alpha".into()));
                }
                Ok(())
            }
        }
    }
}

/// The map `Φ` whose image forms `Y_c = Â Φ`.
#[derive(Debug, Clone)]
pub enum ColumnMap {
    /// `Φ = opᵀ` for a regression embedding `op` (`t x cols`).
    Operator(SketchOperator),
    /// Explicit `cols x t` matrix (the `Priv1` map `t⁻¹ Φ Ω`).
    Dense(DenseMatrix),
}

impl ColumnMap {
    pub fn out_dim(&self) -> usize {
        match self {
            ColumnMap::Operator(op) => op.out_dim(),
            ColumnMap::Dense(m) => m.cols(),
        }
    }

    /// `a · Φ`.
    pub fn apply(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            ColumnMap::Operator(op) => op.apply_right(a),
            ColumnMap::Dense(m) => {
                if a.cols() != m.rows() {
                    return Err(Error::DimensionMismatch("column map input width".into()));
                }
                Ok(a.matmul(m))
            }
        }
    }

    fn update(&self, i: usize, j: usize, delta: f64, target: &mut DenseMatrix) -> Result<()> {
        match self {
            ColumnMap::Operator(op) => op.apply_update(Side::Right, i, j, delta, target),
            ColumnMap::Dense(m) => {
                for (t, x) in target.row_mut(i).iter_mut().zip(m.row(j)) {
                    *t += delta * x;
                }
                Ok(())
            }
        }
    }
}

/// Sketches `Y_c = ÂΦ`, `Y_r = ΨÂ`, `Z = SÂTᵀ` of a work matrix `Â`.
#[derive(Debug, Clone)]
pub struct TwoSided {
    pub phi: ColumnMap,
    pub psi: SketchOperator,
    pub s: SketchOperator,
    pub t_op: SketchOperator,
    pub y_c: DenseMatrix,
    pub y_r: DenseMatrix,
    pub z: DenseMatrix,
}

/// Sketches `Y = AΦ`, `Z = SA`.
#[derive(Debug, Clone)]
pub struct OneSided {
    pub phi: SketchOperator,
    pub s: SketchOperator,
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Layout {
    TwoSided(TwoSided),
    OneSided(OneSided),
}

/// Plain sketch matrices, as produced by [`SketchState::sketch_dense`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sketches {
    TwoSided {
        y_c: DenseMatrix,
        y_r: DenseMatrix,
        z: DenseMatrix,
    },
    OneSided {
        y: DenseMatrix,
        z: DenseMatrix,
    },
}

/// Live sketch state for one stream.
///
/// Under `Priv1` the sketched work matrix is `Â = (A | σ_min Iₘ)` when
/// `m <= n`, or `(Aᵀ | σ_min Iₙ)` otherwise (`transposed`). The identity
/// block is folded in at construction; user updates address `A` only.
#[derive(Debug, Clone)]
pub struct SketchState {
    config: StateConfig,
    dims: EmbeddingDims,
    transposed: bool,
    work_rows: usize,
    work_cols: usize,
    noise: Option<NoiseScales>,
    layout: Layout,
    updates_seen: u64,
}

impl SketchState {
    pub fn init(cfg: &StateConfig) -> Result<Self> {
        cfg.validate()?;
        let (m, n) = (cfg.m, cfg.n);
        let raw = match (cfg.dims, cfg.mode.level()) {
            (Some(d), _) => d,
            (None, None) => sketch::dims_nonprivate(cfg.k, cfg.alpha, cfg.c)?,
            (None, Some(level)) => {
                let p = cfg.privacy.as_ref().expect("validated");
                sketch::dims_private(cfg.k, cfg.alpha, p.delta, level, cfg.c)?
            }
        };
        let dims = raw.clamped(m.min(n));
        let (t, v) = (dims.t, dims.v);
        let seed = cfg.seed;
        let reg =
            |out, inp, role| SketchOperator::sample_embedding(cfg.regression_kind, out, inp, rng::derive(seed, role));
        let aff = |out, inp, role| SketchOperator::sample_embedding(cfg.affine_kind, out, inp, rng::derive(seed, role));

        let noise = match &cfg.privacy {
            Some(p) => Some(dp::calibrate(p, t)?),
            None => None,
        };

        let mut state = match cfg.mode {
            Mode::NonPrivate => {
                let layout = Layout::TwoSided(TwoSided {
                    phi: ColumnMap::Operator(reg(t, n, Role::Phi)?),
                    psi: reg(t, m, Role::Psi)?,
                    s: aff(v, m, Role::LeftAffine)?,
                    t_op: aff(v, n, Role::RightAffine)?,
                    y_c: DenseMatrix::zeros(m, t),
                    y_r: DenseMatrix::zeros(t, n),
                    z: DenseMatrix::zeros(v, v),
                });
                SketchState::assemble(cfg, dims, false, m, n, noise, layout)
            }
            Mode::Priv2 => {
                let layout = Layout::OneSided(OneSided {
                    phi: reg(t, n, Role::Phi)?,
                    s: aff(v, m, Role::LeftAffine)?,
                    y: DenseMatrix::zeros(m, t),
                    z: DenseMatrix::zeros(v, n),
                });
                SketchState::assemble(cfg, dims, false, m, n, noise, layout)
            }
            Mode::Priv1 => {
                let transposed = m > n;
                let u = m.min(n);
                let wr = u;
                let wc = m + n;
                let phi_op = reg(u, wc, Role::Phi)?;
                // Ω is u x t with N(0, 1) entries, drawn here as its transpose.
                let omega_t =
                    SketchOperator::sample(SketchKind::Gaussian, t, u, rng::derive(seed, Role::Omega), 1.0)?.to_dense();
                let inv_t = 1.0 / t as f64;
                let mut phi_hat = DenseMatrix::zeros(wc, t);
                for j in 0..wc {
                    let row = phi_hat.row_mut(j);
                    for (r, x) in phi_op.column_entries(j) {
                        for (o, g) in row.iter_mut().zip(omega_t.col(r)) {
                            *o += inv_t * x * g;
                        }
                    }
                }
                let layout = Layout::TwoSided(TwoSided {
                    phi: ColumnMap::Dense(phi_hat),
                    psi: reg(t, wr, Role::Psi)?,
                    s: aff(v, wr, Role::LeftAffine)?,
                    t_op: aff(v, wc, Role::RightAffine)?,
                    y_c: DenseMatrix::zeros(wr, t),
                    y_r: DenseMatrix::zeros(t, wc),
                    z: DenseMatrix::zeros(v, v),
                });
                let mut st = SketchState::assemble(cfg, dims, transposed, wr, wc, noise, layout);
                let sigma = st.sigma_min();
                if sigma != 0.0 {
                    let orig_cols = wc - u;
                    for i in 0..u {
                        st.fold(i, orig_cols + i, sigma)?;
                    }
                }
                st
            }
        };
        state.updates_seen = 0;
        Ok(state)
    }

    fn assemble(
        cfg: &StateConfig,
        dims: EmbeddingDims,
        transposed: bool,
        work_rows: usize,
        work_cols: usize,
        noise: Option<NoiseScales>,
        layout: Layout,
    ) -> Self {
        SketchState {
            config: cfg.clone(),
            dims,
            transposed,
            work_rows,
            work_cols,
            noise,
            layout,
            updates_seen: 0,
        }
    }

    /// Applies one update of the original `m x n` matrix.
    pub fn ingest(&mut self, u: TurnstileUpdate) -> Result<()> {
        let (m, n) = (self.config.m, self.config.n);
        if u.i >= m || u.j >= n {
            return Err(Error::IndexOutOfRange {
                i: u.i,
                j: u.j,
                rows: m,
                cols: n,
            });
        }
        if !u.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "update value {} is not finite",
                u.delta
            )));
        }
        let (wi, wj) = if self.transposed { (u.j, u.i) } else { (u.i, u.j) };
        self.fold(wi, wj, u.delta)?;
        self.updates_seen += 1;
        Ok(())
    }

    pub fn ingest_all<I: IntoIterator<Item = TurnstileUpdate>>(&mut self, updates: I) -> Result<()> {
        for u in updates {
            self.ingest(u)?;
        }
        Ok(())
    }

    /// Folds `delta · e_i e_jᵀ` of the work matrix into all sketches.
    fn fold(&mut self, i: usize, j: usize, delta: f64) -> Result<()> {
        match &mut self.layout {
            Layout::TwoSided(s) => {
                s.phi.update(i, j, delta, &mut s.y_c)?;
                s.psi.apply_update(Side::Left, i, j, delta, &mut s.y_r)?;
                apply_update_two_sided(&s.s, &s.t_op, i, j, delta, &mut s.z)
            }
            Layout::OneSided(s) => {
                s.phi.apply_update(Side::Right, i, j, delta, &mut s.y)?;
                s.s.apply_update(Side::Left, i, j, delta, &mut s.z)
            }
        }
    }

    /// Sketches of the dense matrix `a` (original coordinates, augmentation
    /// included) computed in one shot with the state's operators. Independent
    /// of the update path; used to check streaming equivalence.
    pub fn sketch_dense(&self, a: &DenseMatrix) -> Result<Sketches> {
        if a.shape() != (self.config.m, self.config.n) {
            return Err(Error::DimensionMismatch("sketch_dense input shape".into()));
        }
        let work = self.work_matrix(a);
        Ok(match &self.layout {
            Layout::TwoSided(s) => Sketches::TwoSided {
                y_c: s.phi.apply(&work)?,
                y_r: s.psi.apply_left(&work)?,
                z: s.t_op.apply_right(&s.s.apply_left(&work)?)?,
            },
            Layout::OneSided(s) => Sketches::OneSided {
                y: s.phi.apply_right(&work)?,
                z: s.s.apply_left(&work)?,
            },
        })
    }

    /// The matrix actually sketched: `a` itself, or `(a | σ_min I)` /
    /// `(aᵀ | σ_min I)` under `Priv1`.
    pub fn work_matrix(&self, a: &DenseMatrix) -> DenseMatrix {
        if self.config.mode != Mode::Priv1 {
            return a.clone();
        }
        let base = if self.transposed { a.transpose() } else { a.clone() };
        let u = base.rows();
        base.hstack(&DenseMatrix::identity(u).scaled(self.sigma_min()))
    }

    /// Current sketch matrices.
    pub fn sketches(&self) -> Sketches {
        match &self.layout {
            Layout::TwoSided(s) => Sketches::TwoSided {
                y_c: s.y_c.clone(),
                y_r: s.y_r.clone(),
                z: s.z.clone(),
            },
            Layout::OneSided(s) => Sketches::OneSided {
                y: s.y.clone(),
                z: s.z.clone(),
            },
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config(&self) -> &StateConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn dims(&self) -> EmbeddingDims {
        self.dims
    }

    pub fn updates_seen(&self) -> u64 {
        self.updates_seen
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn work_shape(&self) -> (usize, usize) {
        (self.work_rows, self.work_cols)
    }

    pub fn noise_scales(&self) -> Option<NoiseScales> {
        self.noise
    }

    pub fn sigma_min(&self) -> f64 {
        self.noise.map_or(0.0, |s| s.sigma_min)
    }

    /// Number of scalars held by the sketches.
    pub fn footprint(&self) -> usize {
        let sizes = |m: &DenseMatrix| m.rows() * m.cols();
        match &self.layout {
            Layout::TwoSided(s) => sizes(&s.y_c) + sizes(&s.y_r) + sizes(&s.z),
            Layout::OneSided(s) => sizes(&s.y) + sizes(&s.z),
        }
    }
}
