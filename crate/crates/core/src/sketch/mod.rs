//! Random sketching operators.
//!
//! A [`SketchOperator`] is a random `out_dim x in_dim` matrix `S` that is
//! never materialized: it is regenerated from `(kind, dims, seed, scale)` and
//! applied through its structure.
//!
//! * `CountSketch`: column `j` holds `scale · σ(j)` at row `h(j)`.
//! * `Srht`: `scale · Π W D` restricted to the first `in_dim` columns, where
//!   `D` is a random ±1 diagonal of size `pad = next_pow2(in_dim)`, `W` the
//!   orthonormal Hadamard matrix and `Π` selects `out_dim` distinct rows.
//!   At `scale = 1` (and `in_dim = pad`) the rows are orthonormal.
//! * `Gaussian`: i.i.d. `N(0, scale²)` entries.
//! * `SrhtCountSketch`: `scale · P · (√(inner/in) H)` with `P` a unit-scale
//!   SRHT `out x inner` and `H` a CountSketch `inner x in`.
//!
//! Left application computes `S·A`; right application computes `A·Sᵀ`, so a
//! right-hand embedding `Φ` is stored through its transpose.

mod dims;
pub mod hadamard;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use dims::{dims_nonprivate, dims_private, EmbeddingDims, DEFAULT_CALIBRATION};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::rng::{self, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchKind {
    #[serde(rename = "countsketch")]
    CountSketch,
    Srht,
    Gaussian,
    #[serde(rename = "srht_countsketch")]
    SrhtCountSketch,
}

impl SketchKind {
    pub fn name(self) -> &'static str {
        match self {
            SketchKind::CountSketch => "countsketch",
            SketchKind::Srht => "srht",
            SketchKind::Gaussian => "gaussian",
            SketchKind::SrhtCountSketch => "srht_countsketch",
        }
    }
}

impl std::str::FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "countsketch" | "count_sketch" | "count-sketch" => Ok(SketchKind::CountSketch),
            "srht" => Ok(SketchKind::Srht),
            "gaussian" => Ok(SketchKind::Gaussian),
            "srht_countsketch" | "srht-countsketch" => Ok(SketchKind::SrhtCountSketch),
            other => Err(Error::InvalidParameter(format!("unknown sketch kind `{other}`"))),
        }
    }
}

/// The serialized identity of an operator; the payload is always
/// regenerated from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: SketchKind,
    pub out_dim: usize,
    pub in_dim: usize,
    pub seed: u64,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_dim: Option<usize>,
}

#[derive(Debug, Clone)]
enum Payload {
    CountSketch {
        targets: Vec<usize>,
        signs: Vec<f64>,
    },
    Srht {
        pad: usize,
        signs: Vec<f64>,
        selected: Vec<usize>,
    },
    Gaussian {
        matrix: DenseMatrix,
    },
    Composed {
        inner: Box<SketchOperator>,
        outer: Box<SketchOperator>,
    },
}

/// Which side of the sketched matrix an operator multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `target = S · A`
    Left,
    /// `target = A · Sᵀ`
    Right,
}

#[derive(Debug, Clone)]
pub struct SketchOperator {
    spec: OperatorSpec,
    payload: Payload,
}

/// Scale that makes `E‖Sx‖² = ‖x‖²` for the given kind and shape.
pub fn embedding_scale(kind: SketchKind, out_dim: usize, in_dim: usize, inner_dim: Option<usize>) -> f64 {
    let out = out_dim.max(1) as f64;
    match kind {
        SketchKind::CountSketch => 1.0,
        SketchKind::Srht => (in_dim.next_power_of_two() as f64 / out).sqrt(),
        SketchKind::Gaussian => 1.0 / out.sqrt(),
        SketchKind::SrhtCountSketch => {
            let inner = inner_dim.unwrap_or_else(|| default_inner_dim(out_dim, in_dim));
            let pad = inner.next_power_of_two() as f64;
            (in_dim as f64 * pad / (inner as f64 * out)).sqrt()
        }
    }
}

/// Intermediate CountSketch size for the composed operator when none is given.
pub fn default_inner_dim(out_dim: usize, in_dim: usize) -> usize {
    (4 * out_dim).next_power_of_two().clamp(out_dim, in_dim.max(out_dim))
}

impl SketchOperator {
    /// Samples an operator deterministically from `seed`.
    pub fn sample(kind: SketchKind, out_dim: usize, in_dim: usize, seed: u64, scale: f64) -> Result<Self> {
        let inner_dim = (kind == SketchKind::SrhtCountSketch).then(|| default_inner_dim(out_dim, in_dim));
        Self::from_spec(OperatorSpec {
            kind,
            out_dim,
            in_dim,
            seed,
            scale,
            inner_dim,
        })
    }

    /// Samples with [`embedding_scale`].
    pub fn sample_embedding(kind: SketchKind, out_dim: usize, in_dim: usize, seed: u64) -> Result<Self> {
        let inner_dim = (kind == SketchKind::SrhtCountSketch).then(|| default_inner_dim(out_dim, in_dim));
        let scale = embedding_scale(kind, out_dim, in_dim, inner_dim);
        Self::from_spec(OperatorSpec {
            kind,
            out_dim,
            in_dim,
            seed,
            scale,
            inner_dim,
        })
    }

    /// SRHT (`out x inner`) composed with CountSketch (`inner x in`).
    pub fn sample_composed(out_dim: usize, inner_dim: usize, in_dim: usize, seed: u64, scale: f64) -> Result<Self> {
        Self::from_spec(OperatorSpec {
            kind: SketchKind::SrhtCountSketch,
            out_dim,
            in_dim,
            seed,
            scale,
            inner_dim: Some(inner_dim),
        })
    }

    /// Regenerates the operator described by `spec`.
    pub fn from_spec(spec: OperatorSpec) -> Result<Self> {
        let OperatorSpec {
            kind,
            out_dim,
            in_dim,
            seed,
            scale,
            inner_dim,
        } = spec;
        if out_dim == 0 || in_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "sketch dimensions must be positive, got {out_dim}x{in_dim}"
            )));
        }
        if !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("sketch scale {scale} is not finite")));
        }
        if kind != SketchKind::Gaussian && out_dim > in_dim {
            return Err(Error::InvalidParameter(format!(
                "{} operator cannot map {in_dim} dimensions up to {out_dim}",
                kind.name()
            )));
        }
        let payload = match kind {
            SketchKind::CountSketch => {
                let mut h = rng::stream(seed, Role::Hash);
                let mut sg = rng::stream(seed, Role::Signs);
                let targets = (0..in_dim).map(|_| h.random_range(0..out_dim)).collect();
                let signs = (0..in_dim)
                    .map(|_| if sg.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                Payload::CountSketch { targets, signs }
            }
            SketchKind::Srht => {
                let pad = in_dim.next_power_of_two();
                let mut sg = rng::stream(seed, Role::Signs);
                let signs = (0..pad).map(|_| if sg.random::<bool>() { 1.0 } else { -1.0 }).collect();
                let mut rows = rng::stream(seed, Role::Rows);
                let selected = index::sample(&mut rows, pad, out_dim).into_vec();
                Payload::Srht { pad, signs, selected }
            }
            SketchKind::Gaussian => {
                let mut g = rng::stream(seed, Role::Hash);
                let data = (0..out_dim * in_dim)
                    .map(|_| scale * g.sample::<f64, _>(StandardNormal))
                    .collect();
                Payload::Gaussian {
                    matrix: DenseMatrix::new(out_dim, in_dim, data)?,
                }
            }
            SketchKind::SrhtCountSketch => {
                let inner_dim = inner_dim.unwrap_or_else(|| default_inner_dim(out_dim, in_dim));
                if inner_dim < out_dim || inner_dim > in_dim {
                    return Err(Error::InvalidParameter(format!(
                        "inner dimension {inner_dim} must lie in [{out_dim}, {in_dim}]"
                    )));
                }
                let inner = SketchOperator::sample(
                    SketchKind::CountSketch,
                    inner_dim,
                    in_dim,
                    rng::derive(seed, Role::InnerSketch),
                    (inner_dim as f64 / in_dim as f64).sqrt(),
                )?;
                let outer = SketchOperator::sample(
                    SketchKind::Srht,
                    out_dim,
                    inner_dim,
                    rng::derive(seed, Role::OuterSketch),
                    scale,
                )?;
                Payload::Composed {
                    inner: Box::new(inner),
                    outer: Box::new(outer),
                }
            }
        };
        let inner_dim = match kind {
            SketchKind::SrhtCountSketch => inner_dim.or_else(|| Some(default_inner_dim(out_dim, in_dim))),
            _ => None,
        };
        Ok(SketchOperator {
            spec: OperatorSpec { inner_dim, ..spec },
            payload,
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn kind(&self) -> SketchKind {
        self.spec.kind
    }

    pub fn out_dim(&self) -> usize {
        self.spec.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.spec.in_dim
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    pub fn scale(&self) -> f64 {
        self.spec.scale
    }

    /// CountSketch hash targets and signs, if this is a CountSketch.
    pub fn count_sketch_payload(&self) -> Option<(&[usize], &[f64])> {
        match &self.payload {
            Payload::CountSketch { targets, signs } => Some((targets, signs)),
            _ => None,
        }
    }

    /// Selected Hadamard rows and the padded size, if this is an SRHT.
    pub fn srht_payload(&self) -> Option<(usize, &[f64], &[usize])> {
        match &self.payload {
            Payload::Srht { pad, signs, selected } => Some((*pad, signs, selected)),
            _ => None,
        }
    }

    /// True when every nonzero entry is `±2^p` for a single `p`. Integer
    /// updates of moderate size then accumulate without rounding, so the
    /// sketch does not depend on update order.
    pub fn has_exact_entries(&self) -> bool {
        let mag = match &self.payload {
            Payload::CountSketch { .. } => self.spec.scale.abs(),
            Payload::Srht { pad, .. } => (self.spec.scale / (*pad as f64).sqrt()).abs(),
            _ => return false,
        };
        mag > 0.0 && mag == 2f64.powi(mag.log2().round() as i32)
    }

    /// Nonzero entries `(row, value)` of column `j` of `S`.
    pub fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        debug_assert!(j < self.spec.in_dim);
        let scale = self.spec.scale;
        match &self.payload {
            Payload::CountSketch { targets, signs } => vec![(targets[j], scale * signs[j])],
            Payload::Srht { pad, signs, selected } => {
                let c = scale * signs[j] / (*pad as f64).sqrt();
                selected
                    .iter()
                    .enumerate()
                    .map(|(r, &sel)| (r, c * hadamard::entry(sel, j)))
                    .collect()
            }
            Payload::Gaussian { matrix } => (0..matrix.rows()).map(|r| (r, matrix.get(r, j))).collect(),
            Payload::Composed { inner, outer } => {
                let (mid, w) = inner.column_entries(j)[0];
                outer.column_entries(mid).into_iter().map(|(r, x)| (r, w * x)).collect()
            }
        }
    }

    /// Dense `out_dim x in_dim` matrix of the operator. Intended for tests
    /// and small instances.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.spec.out_dim, self.spec.in_dim);
        for j in 0..self.spec.in_dim {
            for (r, x) in self.column_entries(j) {
                m.add_at(r, j, x);
            }
        }
        m
    }

    /// `S · a`.
    pub fn apply_left(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.rows() != self.spec.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator applied to {}x{} matrix",
                self.spec.out_dim,
                self.spec.in_dim,
                a.rows(),
                a.cols()
            )));
        }
        let scale = self.spec.scale;
        let width = a.cols();
        Ok(match &self.payload {
            Payload::CountSketch { targets, signs } => {
                let mut out = DenseMatrix::zeros(self.spec.out_dim, width);
                for i in 0..a.rows() {
                    let w = scale * signs[i];
                    let dst = out.row_mut(targets[i]);
                    for (o, x) in dst.iter_mut().zip(a.row(i)) {
                        *o += w * x;
                    }
                }
                out
            }
            Payload::Srht { pad, signs, selected } => {
                let mut buf = vec![0.0; pad * width];
                for i in 0..a.rows() {
                    let d = signs[i];
                    for (b, x) in buf[i * width..(i + 1) * width].iter_mut().zip(a.row(i)) {
                        *b = d * x;
                    }
                }
                hadamard::fwht_rows(&mut buf, width);
                let c = scale / (*pad as f64).sqrt();
                let mut out = DenseMatrix::zeros(self.spec.out_dim, width);
                for (r, &sel) in selected.iter().enumerate() {
                    for (o, b) in out.row_mut(r).iter_mut().zip(&buf[sel * width..(sel + 1) * width]) {
                        *o = c * b;
                    }
                }
                out
            }
            Payload::Gaussian { matrix } => matrix.matmul(a),
            Payload::Composed { inner, outer } => outer.apply_left(&inner.apply_left(a)?)?,
        })
    }

    /// `a · Sᵀ`.
    pub fn apply_right(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        if a.cols() != self.spec.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times transpose of {}x{} operator",
                a.rows(),
                a.cols(),
                self.spec.out_dim,
                self.spec.in_dim
            )));
        }
        Ok(self.apply_left(&a.transpose())?.transpose())
    }

    /// Folds the rank-one update `delta · e_i e_jᵀ` of the sketched matrix
    /// into `target`.
    ///
    /// For [`Side::Left`] (`target = S·A`) column `j` gains `delta · S[:, i]`;
    /// for [`Side::Right`] (`target = A·Sᵀ`) row `i` gains `delta · S[:, j]ᵀ`.
    /// A CountSketch touches a single entry either way.
    pub fn apply_update(&self, side: Side, i: usize, j: usize, delta: f64, target: &mut DenseMatrix) -> Result<()> {
        check_delta(delta)?;
        match side {
            Side::Left => {
                if target.rows() != self.spec.out_dim {
                    return Err(Error::DimensionMismatch("left update target height".into()));
                }
                check_index(i, j, self.spec.in_dim, target.cols())?;
                for (r, x) in self.column_entries(i) {
                    target.add_at(r, j, delta * x);
                }
            }
            Side::Right => {
                if target.cols() != self.spec.out_dim {
                    return Err(Error::DimensionMismatch("right update target width".into()));
                }
                check_index(i, j, target.rows(), self.spec.in_dim)?;
                for (c, x) in self.column_entries(j) {
                    target.add_at(i, c, delta * x);
                }
            }
        }
        Ok(())
    }

    /// `S† · n`.
    ///
    /// For an SRHT over a power-of-two input the rows are orthonormal up to
    /// `scale`, so `S† = scale⁻¹ · D W Πᵀ` and `‖S†n‖_F = ‖n‖_F / scale`
    /// exactly. Other shapes, and the composed operator, are solved through
    /// the identity `S† = Sᵀ (S Sᵀ)†`.
    pub fn pinv_apply(&self, n: &DenseMatrix) -> Result<DenseMatrix> {
        match self.spec.kind {
            SketchKind::Srht | SketchKind::SrhtCountSketch => {}
            other => {
                return Err(Error::Unsupported {
                    op: "pinv_apply",
                    kind: other.name(),
                })
            }
        }
        if n.rows() != self.spec.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "pinv_apply expects {} rows, got {}",
                self.spec.out_dim,
                n.rows()
            )));
        }
        if self.spec.scale == 0.0 {
            return Ok(DenseMatrix::zeros(self.spec.in_dim, n.cols()));
        }
        if let Payload::Srht { pad, signs, selected } = &self.payload {
            if *pad == self.spec.in_dim {
                let width = n.cols();
                let mut buf = vec![0.0; pad * width];
                for (r, &sel) in selected.iter().enumerate() {
                    buf[sel * width..(sel + 1) * width].copy_from_slice(n.row(r));
                }
                hadamard::fwht_rows(&mut buf, width);
                let c = 1.0 / (self.spec.scale * (*pad as f64).sqrt());
                let mut out = DenseMatrix::zeros(*pad, width);
                for i in 0..*pad {
                    let d = c * signs[i];
                    for (o, b) in out.row_mut(i).iter_mut().zip(&buf[i * width..(i + 1) * width]) {
                        *o = d * b;
                    }
                }
                return Ok(out);
            }
        }
        let s = self.to_dense();
        let gram = s.matmul_t(&s);
        Ok(s.t_matmul(&linalg::pinv(&gram, 0.0)?.matmul(n)))
    }
}

/// Folds `delta · e_i e_jᵀ` into `target = L · A · Rᵀ`, i.e. adds
/// `delta · L[:, i] · R[:, j]ᵀ`.
pub fn apply_update_two_sided(
    left: &SketchOperator,
    right: &SketchOperator,
    i: usize,
    j: usize,
    delta: f64,
    target: &mut DenseMatrix,
) -> Result<()> {
    check_delta(delta)?;
    if target.shape() != (left.out_dim(), right.out_dim()) {
        return Err(Error::DimensionMismatch("two-sided update target shape".into()));
    }
    check_index(i, j, left.in_dim(), right.in_dim())?;
    let rcol = right.column_entries(j);
    for (r, x) in left.column_entries(i) {
        for &(c, y) in &rcol {
            target.add_at(r, c, delta * x * y);
        }
    }
    Ok(())
}

fn check_index(i: usize, j: usize, rows: usize, cols: usize) -> Result<()> {
    if i >= rows || j >= cols {
        return Err(Error::IndexOutOfRange { i, j, rows, cols });
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("update value {delta} is not finite")));
    }
    Ok(())
}
