//! Streams a noisy low-rank matrix entry by entry and factors it from the
//! three sketches alone.

use sketchlrf::bench::LowRankSource;
use sketchlrf::lrf;
use sketchlrf::sketch::SketchKind;
use sketchlrf::stream::{SketchState, StateConfig, TurnstileUpdate};

fn main() -> sketchlrf::Result<()> {
    let (m, n, k) = (64, 48, 5);
    let source = LowRankSource::new(m, n, k, 0.1, 7)?;

    let cfg = StateConfig::new(m, n, k, 0.5)
        .seed(1)
        .kind(SketchKind::Gaussian)
        .calibration(0.85);
    let mut state = SketchState::init(&cfg)?;
    for i in 0..m {
        for (j, x) in source.row(i).into_iter().enumerate() {
            state.ingest(TurnstileUpdate::new(i, j, x))?;
        }
    }
    let d = state.dims();
    println!(
        "ingested {} updates into t={} v={} ({} scalars)",
        state.updates_seen(),
        d.t,
        d.v,
        state.footprint()
    );

    let mut report = lrf::factorize(&state, k)?;
    report.evaluate(&source.materialize())?;
    println!("sigma     = {:.3?}", report.factorization.sigma);
    println!("residual  = {:.4}", report.residual_fro.unwrap());
    println!("optimal   = {:.4}", report.oracle_residual_fro.unwrap());
    println!("ratio     = {:.4}", report.ratio.unwrap());
    Ok(())
}
