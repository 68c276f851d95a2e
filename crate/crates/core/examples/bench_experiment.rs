//! Repeated seeded trials with an exact oracle; prints the JSON summary.

use sketchlrf::bench::{run_experiment, ExperimentConfig};
use sketchlrf::sketch::SketchKind;

fn main() -> sketchlrf::Result<()> {
    let mut cfg = ExperimentConfig::new(64, 48, 5, 0.5);
    cfg.trials = 40;
    cfg.seed = 12;
    cfg.regression_kind = SketchKind::Srht;
    cfg.affine_kind = SketchKind::Srht;
    cfg.c = 0.85;
    cfg.thresholds.min_success_rate = Some(0.9);
    let report = run_experiment(&cfg)?;
    let s = &report.summary;
    println!(
        "success {:?}, median ratio {:?}, thresholds met: {}",
        s.success_rate, s.median_ratio, s.thresholds_met
    );
    println!("{}", serde_json::to_string_pretty(s)?);
    Ok(())
}
