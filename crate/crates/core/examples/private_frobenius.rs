//! Priv2: any neighbouring matrices at unit Frobenius distance are
//! protected. Noise grows as 1/epsilon.

use sketchlrf::bench::{gen_lowrank_plus_noise, matrix_updates, Order};
use sketchlrf::dp::{self, PrivacyLevel, PrivacyParams};
use sketchlrf::lrf;
use sketchlrf::stream::{SketchState, StateConfig};

fn main() -> sketchlrf::Result<()> {
    let (m, n, k, alpha) = (64, 48, 5, 0.5);
    let a = gen_lowrank_plus_noise(m, n, k, 0.0, 1)?.scaled(10.0);
    println!("|A|_F = {:.1}", a.frobenius_norm());
    for eps in [0.5, 1.0, 2.0, 4.0, f64::INFINITY] {
        let p = PrivacyParams::new(eps, 0.1, PrivacyLevel::Priv2, alpha)?;
        let cfg = StateConfig::new(m, n, k, alpha).seed(2).calibration(0.85).private(p);
        let mut state = SketchState::init(&cfg)?;
        state.ingest_all(matrix_updates(&a, Order::RowMajor, 0))?;
        let mut r = dp::private_frobenius_lrf(&state, k, 99)?;
        r.evaluate(&a)?;
        let scales = r.noise.unwrap();
        println!(
            "eps {eps:>4}: rho {:.3}  residual {:8.3}  envelope {:8.1}",
            scales.rho,
            r.residual_fro.unwrap(),
            dp::frobenius_envelope(m, n, k, &p)
        );
    }
    println!("optimal rank-{k} residual: {:.3}", lrf::optimal_residual(&a, k)?);
    Ok(())
}
