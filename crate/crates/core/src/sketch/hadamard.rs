//! Unnormalized fast Walsh-Hadamard transform.

/// In-place `x ← H x` with `H` the ±1 Sylvester-Hadamard matrix of order
/// `x.len()`, which must be a power of two.
pub fn fwht(x: &mut [f64]) {
    let n = x.len();
    assert!(n.is_power_of_two(), "fwht length {n} is not a power of two");
    let mut h = 1;
    while h < n {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Applies `H` along the row index of a row-major `pad x width` buffer, i.e.
/// transforms every column at once.
pub fn fwht_rows(buf: &mut [f64], width: usize) {
    let n = buf.len() / width.max(1);
    assert!(n.is_power_of_two(), "fwht length {n} is not a power of two");
    let mut h = 1;
    while h < n {
        for block in buf.chunks_mut(2 * h * width) {
            let (lo, hi) = block.split_at_mut(h * width);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Entry `(i, j)` of the ±1 Sylvester-Hadamard matrix.
#[inline]
pub fn entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
