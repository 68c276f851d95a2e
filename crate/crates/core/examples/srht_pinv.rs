//! The pseudo-inverse of a unit-scale SRHT is an isometry on its range; the
//! composed SRHT x CountSketch operator is one approximately.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sketchlrf::linalg::DenseMatrix;
use sketchlrf::sketch::{SketchKind, SketchOperator};

fn main() -> sketchlrf::Result<()> {
    let mut g = ChaCha8Rng::seed_from_u64(0);
    let n = DenseMatrix::from_fn(16, 3, |_, _| g.sample(StandardNormal))?;

    let s = SketchOperator::sample(SketchKind::Srht, 16, 128, 1, 1.0)?;
    let ratio = s.pinv_apply(&n)?.frobenius_norm() / n.frobenius_norm();
    println!("SRHT 16x128, scale 1:        |S+ N| / |N| = {ratio:.15}");

    let s = SketchOperator::sample(SketchKind::Srht, 16, 128, 1, 3.0)?;
    let ratio = s.pinv_apply(&n)?.frobenius_norm() / n.frobenius_norm();
    println!("SRHT 16x128, scale 3:        |S+ N| / |N| = {ratio:.15}");

    for inner in [32, 64, 256] {
        let s = SketchOperator::sample_composed(16, inner, 4096, 2, 1.0)?;
        let ratio = s.pinv_apply(&n)?.frobenius_norm() / n.frobenius_norm();
        println!("SRHT 16x{inner:<3} . CountSketch:  |S+ N| / |N| = {ratio:.4}");
    }
    Ok(())
}
