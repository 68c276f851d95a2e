//! Checks the sensitivity premise behind the Gaussian noise: sketched
//! neighbouring differences stay below (1 + alpha) in squared norm.

use sketchlrf::dp::{self, PrivacyLevel, PrivacyParams};
use sketchlrf::stream::{SketchState, StateConfig};

fn main() -> sketchlrf::Result<()> {
    let alpha = 0.5;
    for (level, m, n) in [(PrivacyLevel::Priv2, 384, 320), (PrivacyLevel::Priv1, 768, 1024)] {
        let p = PrivacyParams::new(1.0, 0.1, level, alpha)?;
        let st = SketchState::init(&StateConfig::new(m, n, 5, alpha).seed(3).private(p))?;
        let report = dp::sensitivity_audit(level, alpha, m, n, &dp::state_probes(&st), 200, 1)?;
        println!(
            "{level:?} (t={}, v={}) passed: {}",
            st.dims().t,
            st.dims().v,
            report.passed()
        );
        for s in &report.probes {
            println!(
                "  {:8} p95^2 {:.3}  max^2 {:.3}  mean^2 {:.3}",
                s.name, s.p95_sq, s.max_sq, s.mean_sq
            );
        }
    }
    Ok(())
}
