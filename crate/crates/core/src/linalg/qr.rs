//! Householder QR with column pivoting, used to extract orthonormal bases.

use super::matrix::{dot, DenseMatrix};
use crate::error::{Error, Result};

pub(crate) fn check_finite(a: &DenseMatrix) -> Result<()> {
    match a.as_slice().iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(pos) => Err(Error::NonFinite {
            row: pos / a.cols().max(1),
            col: pos % a.cols().max(1),
            value: a.as_slice()[pos],
        }),
    }
}

/// Orthonormal basis for the column space of `a`.
///
/// Runs Householder QR with column pivoting and stops as soon as the largest
/// remaining column residual falls below `max(m, n) * eps * ‖a‖_F`. The
/// number of returned columns is therefore the numerical rank of `a`; a zero
/// matrix yields an `m x 0` result.
pub fn orthonormal_columns(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_finite(a)?;
    let (m, n) = a.shape();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "orthonormal_columns needs at least one column".into(),
        ));
    }
    let threshold = m.max(n) as f64 * f64::EPSILON * a.frobenius_norm();
    let mut cols = a.columns();
    let mut reflectors: Vec<Vec<f64>> = Vec::new();

    for step in 0..m.min(n) {
        let (pivot, best) = (step..n)
            .map(|j| (j, dot(&cols[j][step..], &cols[j][step..])))
            .fold((step, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best.sqrt() <= threshold {
            break;
        }
        cols.swap(step, pivot);

        let x = &cols[step][step..];
        let norm = best.sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        if vnorm == 0.0 {
            // Column already equals alpha * e_step; the reflector is the identity.
            reflectors.push(vec![0.0; m - step]);
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for col in cols.iter_mut().skip(step) {
            reflect(&v, &mut col[step..]);
        }
        reflectors.push(v);
    }

    let rank = reflectors.len();
    let mut q: Vec<Vec<f64>> = (0..rank)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for (step, v) in reflectors.iter().enumerate().rev() {
        for col in q.iter_mut() {
            reflect(v, &mut col[step..]);
        }
    }
    Ok(DenseMatrix::from_columns(m, &q))
}

/// Orthonormal basis for the row space of `a`, returned as rows.
pub fn orthonormal_rows(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(orthonormal_columns(&a.transpose())?.transpose())
}

/// Applies `I - 2 v vᵀ` to `x` in place. `v` is unit length or zero.
fn reflect(v: &[f64], x: &mut [f64]) {
    let s = 2.0 * dot(v, x);
    if s != 0.0 {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= s * vi;
        }
    }
}

/// Extends orthonormal columns `q` (m x r) to `k` orthonormal columns by
/// Gram-Schmidt against the canonical basis. Requires `k <= m`.
pub(crate) fn complete_basis(q: &DenseMatrix, k: usize) -> DenseMatrix {
    let m = q.rows();
    assert!(k <= m, "cannot complete {m}-dimensional basis to {k} columns");
    let mut cols = q.columns();
    let mut e = 0;
    while cols.len() < k && e < m {
        let mut c = vec![0.0; m];
        c[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for b in &cols {
                let p = dot(b, &c);
                c.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&c, &c).sqrt();
        if norm > 0.5 {
            c.iter_mut().for_each(|x| *x /= norm);
            cols.push(c);
        }
    }
    DenseMatrix::from_columns(m, &cols)
}
