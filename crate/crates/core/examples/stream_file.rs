//! Writes a matrix as a turnstile stream file, splits one entry into two
//! updates, and reads it back through the streaming reader.

use std::io::Write;

use sketchlrf::bench::{emit_stream, gen_lowrank_plus_noise, Order};
use sketchlrf::lrf;
use sketchlrf::stream::{SketchState, StateConfig, StreamReader};

fn main() -> sketchlrf::Result<()> {
    let dir = std::env::temp_dir().join("sketchlrf-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("a.stream");

    let a = gen_lowrank_plus_noise(20, 15, 3, 0.0, 3)?;
    let count = emit_stream(&a, Order::Random, &path, 11)?;
    // Turnstile streams may revisit an entry; the deltas add up.
    let mut f = std::fs::OpenOptions::new().append(true).open(&path)?;
    writeln!(f, "# correction\n0 0 2.5\n0 0 -2.5")?;
    println!("wrote {} updates to {}", count + 2, path.display());

    let mut reader = StreamReader::open(&path)?;
    let (m, n) = reader.read_header()?;
    let mut state = SketchState::init(&StateConfig::new(m, n, 3, 0.5).seed(5))?;
    for u in reader {
        state.ingest(u?)?;
    }
    let mut report = lrf::factorize(&state, 3)?;
    report.evaluate(&a)?;
    println!(
        "exact-rank input, residual {:.2e} (|A| = {:.2})",
        report.residual_fro.unwrap(),
        a.frobenius_norm()
    );
    Ok(())
}
