use serde::{Deserialize, Serialize};

use crate::dp::PrivacyLevel;
use crate::error::{Error, Result};

/// Default multiplier standing in for the constants hidden in the
/// asymptotic embedding dimensions.
pub const DEFAULT_CALIBRATION: f64 = 4.0;

/// Sketch sizes: `t` for the regression embeddings `Φ`, `Ψ` and `v` for the
/// affine embeddings `S`, `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDims {
    pub t: usize,
    pub v: usize,
    pub constant_c: f64,
}

impl EmbeddingDims {
    /// Caps both sizes at `max_dim` (the ambient dimension). Sketching no
    /// longer compresses anything past that point, but remains correct.
    pub fn clamped(self, max_dim: usize) -> EmbeddingDims {
        let max_dim = max_dim.max(1);
        if self.t > max_dim || self.v > max_dim {
            log::warn!(
                "embedding dims (t={}, v={}) exceed ambient dimension {max_dim}; clamping",
                self.t,
                self.v
            );
        }
        EmbeddingDims {
            t: self.t.clamp(1, max_dim),
            v: self.v.clamp(1, max_dim),
            constant_c: self.constant_c,
        }
    }
}

fn check_common(k: usize, alpha: f64, c: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank k must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "calibration constant c = {c} must be positive"
        )));
    }
    Ok(())
}

fn ceil_dim(x: f64) -> usize {
    (x.ceil() as usize).max(1)
}

/// `t = ⌈c·(k/α)·log₂(k+2)⌉`, `v = ⌈c·(k/α²)·log₂(k+2)⌉`.
pub fn dims_nonprivate(k: usize, alpha: f64, c: f64) -> Result<EmbeddingDims> {
    check_common(k, alpha, c)?;
    let kf = k as f64;
    let lg = (kf + 2.0).log2();
    Ok(EmbeddingDims {
        t: ceil_dim(c * (kf / alpha) * lg),
        v: ceil_dim(c * (kf / (alpha * alpha)) * lg),
        constant_c: c,
    })
}

/// `t = ⌈c·max(k/α, α⁻²)·log₂(1/δ)⌉`, `v = ⌈c·max(k/α², α⁻⁴)·log₂(1/δ)⌉`,
/// with an extra `log₂(k+2)` factor on both under [`PrivacyLevel::Priv1`].
pub fn dims_private(k: usize, alpha: f64, delta: f64, level: PrivacyLevel, c: f64) -> Result<EmbeddingDims> {
    check_common(k, alpha, c)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    let kf = k as f64;
    let a2 = alpha * alpha;
    let lg_delta = (1.0 / delta).log2();
    let extra = match level {
        PrivacyLevel::Priv1 => (kf + 2.0).log2(),
        PrivacyLevel::Priv2 => 1.0,
    };
    Ok(EmbeddingDims {
        t: ceil_dim(c * (kf / alpha).max(1.0 / a2) * lg_delta * extra),
        v: ceil_dim(c * (kf / a2).max(1.0 / (a2 * a2)) * lg_delta * extra),
        constant_c: c,
    })
}
