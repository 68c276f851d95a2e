//! Streaming low-rank factorization from small linear sketches.
//!
//! A matrix arriving as a turnstile stream of `(i, j, Δ)` updates is
//! compressed into three sketches `Y_c = AΦ`, `Y_r = ΨA` and `Z = SATᵀ`.
//! Once the stream ends, [`lrf::factorize`] reconstructs a rank-k
//! factorization whose Frobenius error is within `(1 + α)` of the best
//! rank-k approximation with high probability. The [`dp`] module adds
//! Gaussian noise calibrated for `(ε, δ)`-differential privacy under two
//! neighbouring-matrix notions.
//!
//! ```
//! use sketchlrf::prelude::*;
//!
//! let a = sketchlrf::bench::gen_lowrank_plus_noise(40, 30, 3, 0.0, 7).unwrap();
//! let cfg = StateConfig::new(40, 30, 3, 0.5).seed(11);
//! let mut state = SketchState::init(&cfg).unwrap();
//! for i in 0..40 {
//!     for j in 0..30 {
//!         state.ingest(TurnstileUpdate::new(i, j, a.get(i, j))).unwrap();
//!     }
//! }
//! let report = lrf::factorize(&state, 3).unwrap();
//! let err = a.sub(&report.factorization.reconstruct()).frobenius_norm();
//! assert!(err < 1e-6 * a.frobenius_norm());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dp;
mod error;
pub mod linalg;
pub mod lrf;
pub mod rng;
pub mod sketch;
pub mod stream;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dp::{PrivacyLevel, PrivacyParams};
    pub use crate::linalg::{DenseMatrix, Factorization};
    pub use crate::lrf;
    pub use crate::sketch::{SketchKind, SketchOperator};
    pub use crate::stream::{Mode, SketchState, StateConfig, TurnstileUpdate};
    pub use crate::{Error, Result};
}
