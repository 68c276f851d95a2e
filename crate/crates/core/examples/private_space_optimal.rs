//! Priv1: neighbours differ by a unit rank-one matrix. The sketched matrix is
//! augmented with sigma_min * I, and both orientations agree.

use sketchlrf::bench::{gen_lowrank_plus_noise, matrix_updates, Order};
use sketchlrf::dp::{self, PrivacyLevel, PrivacyParams};
use sketchlrf::sketch::SketchKind;
use sketchlrf::stream::{SketchState, StateConfig};

fn main() -> sketchlrf::Result<()> {
    let k = 3;
    let a = gen_lowrank_plus_noise(30, 50, k, 0.0, 4)?.scaled(2000.0);
    let p = PrivacyParams::new(1.0, 0.1, PrivacyLevel::Priv1, 0.5)?;

    let run = |a: &sketchlrf::linalg::DenseMatrix| -> sketchlrf::Result<_> {
        let cfg = StateConfig::new(a.rows(), a.cols(), k, 0.5)
            .seed(8)
            .kind(SketchKind::Gaussian)
            .calibration(0.85)
            .private(p);
        let mut st = SketchState::init(&cfg)?;
        st.ingest_all(matrix_updates(a, Order::Random, 1))?;
        println!(
            "{}x{}: work matrix {:?}, transposed {}, sigma_min {:.1}",
            a.rows(),
            a.cols(),
            st.work_shape(),
            st.is_transposed(),
            st.sigma_min()
        );
        let mut r = dp::private_space_optimal_lrf(&st, k, 3)?;
        r.evaluate(a)?;
        Ok(r)
    };
    let wide = run(&a)?;
    let tall = run(&a.transpose())?;
    let rel = |r: &sketchlrf::lrf::LrfReport| r.residual_fro.unwrap() / a.frobenius_norm();
    println!("relative residual {:.4} vs {:.4}", rel(&wide), rel(&tall));
    let swapped = wide.factorization.transposed();
    println!(
        "max |U_tall - V_wide| = {:.1e}",
        tall.factorization.u.sub(&swapped.u).max_abs()
    );
    Ok(())
}
