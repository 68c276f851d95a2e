#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sketchlrf::linalg::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_with(rows: usize, cols: usize, g: &mut impl Rng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| g.sample(StandardNormal)).collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    gaussian_with(rows, cols, &mut rng(seed))
}

/// Random matrix of exact rank `r` (generically).
pub fn low_rank(rows: usize, cols: usize, r: usize, seed: u64) -> DenseMatrix {
    let mut g = rng(seed);
    gaussian_with(rows, r, &mut g).matmul(&gaussian_with(r, cols, &mut g))
}

pub fn unit_vector(len: usize, g: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| g.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn col_vector(v: &[f64]) -> DenseMatrix {
    DenseMatrix::new(v.len(), 1, v.to_vec()).unwrap()
}

/// `max |QᵀQ − I|`.
pub fn orth_err(q: &DenseMatrix) -> f64 {
    q.t_matmul(q).sub(&DenseMatrix::identity(q.cols())).max_abs()
}

pub fn to_na(a: &DenseMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Singular values from the eigenvalues of `aᵀa` (or `aaᵀ`), descending.
pub fn eig_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let na = to_na(a);
    let gram = if a.rows() >= a.cols() {
        na.transpose() * &na
    } else {
        &na * na.transpose()
    };
    let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Fraction of `xs` satisfying `pred`.
pub fn frequency<T>(xs: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    xs.iter().filter(|x| pred(x)).count() as f64 / xs.len() as f64
}

pub fn parts(s: &sketchlrf::stream::Sketches) -> Vec<&DenseMatrix> {
    use sketchlrf::stream::Sketches;
    match s {
        Sketches::TwoSided { y_c, y_r, z } => vec![y_c, y_r, z],
        Sketches::OneSided { y, z } => vec![y, z],
    }
}
