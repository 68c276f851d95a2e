//! Dense real linear algebra: orthonormal bases, thin SVD, pseudo-inverse,
//! rank-k truncation and norms. All routines are pure functions of their
//! inputs.

mod matrix;
mod qr;
mod svd;

pub use matrix::DenseMatrix;
pub use qr::{orthonormal_columns, orthonormal_rows};
pub use svd::{
    default_pinv_tol, frobenius_norm, pinv, singular_values, spectral_norm, svd, truncate_rank_k, Factorization, Shape,
    Svd, JACOBI_TOL, MAX_SWEEPS,
};

pub(crate) use matrix::dot;
