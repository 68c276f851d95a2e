use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sketchlrf::bench::{self, ExperimentConfig, Order, Thresholds};
use sketchlrf::dp::{self, PrivacyLevel, PrivacyParams};
use sketchlrf::linalg::DenseMatrix;
use sketchlrf::lrf::LrfReport;
use sketchlrf::sketch::{SketchKind, DEFAULT_CALIBRATION};
use sketchlrf::stream::{self, Layout, Mode, SketchState, StateConfig};

#[derive(Parser)]
#[command(
    name = "sketchlrf",
    version,
    about = "Streaming low-rank factorization from linear sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a low-rank-plus-noise matrix as a stream file.
    Gen(GenArgs),
    /// Ingest a stream and write the sketches.
    Sketch(RunArgs),
    /// Ingest a stream and write a rank-k factorization.
    Factorize(RunArgs),
    /// Private factorization (requires --mode priv1|priv2).
    DpFactorize(RunArgs),
    /// Empirical sensitivity audit of the sketch operators.
    Audit(AuditArgs),
    /// Repeated end-to-end trials on synthetic data.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value = "nonprivate")]
    mode: Mode,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, env = "SKETCHLRF_SEED", default_value_t = 0)]
    seed: u64,
    /// Calibration multiplier for the sketch sizes.
    #[arg(long, default_value_t = DEFAULT_CALIBRATION)]
    c: f64,
    #[arg(long, default_value = "countsketch")]
    sketch: SketchKind,
    /// Explicit regression sketch size, overriding the calibration.
    #[arg(long, requires = "v")]
    t: Option<usize>,
    /// Explicit affine sketch size, overriding the calibration.
    #[arg(long, requires = "t")]
    v: Option<usize>,
}

impl Common {
    fn privacy(&self) -> Result<Option<PrivacyParams>> {
        let Some(level) = self.mode.level() else {
            if self.epsilon.is_some() || self.delta.is_some() {
                bail!("--epsilon/--delta need --mode priv1 or priv2");
            }
            return Ok(None);
        };
        let eps = self.epsilon.context("--epsilon is required for private modes")?;
        let delta = self.delta.context("--delta is required for private modes")?;
        Ok(Some(PrivacyParams::new(eps, delta, level, self.alpha)?))
    }

    fn state_config(&self, m: usize, n: usize) -> Result<StateConfig> {
        let mut cfg = StateConfig::new(m, n, self.k, self.alpha)
            .seed(self.seed)
            .kind(self.sketch)
            .calibration(self.c);
        if let Some(p) = self.privacy()? {
            cfg = cfg.private(p);
        }
        if let (Some(t), Some(v)) = (self.t, self.v) {
            cfg = cfg.dims(t, v);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// Rank of the planted signal.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = bench::DEFAULT_NOISE_LEVEL)]
    noise: f64,
    #[arg(long, default_value = "row-major")]
    order: Order,
    #[arg(long, env = "SKETCHLRF_SEED", default_value_t = 0)]
    seed: u64,
    /// Stream file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the matrix itself.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Stream file with a `% m n` header.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also compare against the exact rank-k residual (materializes A).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = bench::DEFAULT_NOISE_LEVEL)]
    noise: f64,
    /// Rank of the planted signal (defaults to k).
    #[arg(long)]
    data_rank: Option<usize>,
    #[arg(long)]
    no_oracle: bool,
    #[arg(long)]
    timing: bool,
    /// Exit with status 1 unless this fraction of trials has ratio <= 1 + alpha.
    #[arg(long)]
    min_success_rate: Option<f64>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => gen(a)?,
        Command::Sketch(a) => sketch(a)?,
        Command::Factorize(a) => factorize(a, false)?,
        Command::DpFactorize(a) => factorize(a, true)?,
        Command::Audit(a) => audit(a)?,
        Command::Bench(a) => return bench_cmd(a),
    }
    Ok(ExitCode::SUCCESS)
}

fn gen(a: GenArgs) -> Result<()> {
    let m = bench::gen_lowrank_plus_noise(a.m, a.n, a.k, a.noise, a.seed)?;
    let count = bench::emit_stream(&m, a.order, &a.out, a.seed)?;
    if let Some(p) = &a.matrix {
        m.write_to(p)?;
    }
    eprintln!("wrote {count} updates to {}", a.out.display());
    Ok(())
}

fn ingest(input: &Path, common: &Common) -> Result<SketchState> {
    let mut reader = stream::StreamReader::open(input)?;
    let (m, n) = reader.read_header()?;
    let mut state = SketchState::init(&common.state_config(m, n)?)?;
    for u in reader.by_ref() {
        state.ingest(u?)?;
    }
    log::info!("ingested {} updates", state.updates_seen());
    Ok(state)
}

fn state_json(state: &SketchState) -> serde_json::Value {
    let operators = match state.layout() {
        Layout::TwoSided(s) => {
            let phi = match &s.phi {
                stream::ColumnMap::Operator(op) => json!(op.spec()),
                stream::ColumnMap::Dense(_) => json!("dense"),
            };
            json!({"phi": phi, "psi": s.psi.spec(), "s": s.s.spec(), "t": s.t_op.spec()})
        }
        Layout::OneSided(s) => json!({"phi": s.phi.spec(), "s": s.s.spec()}),
    };
    json!({
        "config": state.config(),
        "dims": state.dims(),
        "work_shape": state.work_shape(),
        "transposed": state.is_transposed(),
        "updates_seen": state.updates_seen(),
        "noise": state.noise_scales(),
        "operators": operators,
    })
}

fn sketch(a: RunArgs) -> Result<()> {
    let state = ingest(&a.input, &a.common)?;
    fs::create_dir_all(&a.out)?;
    match state.sketches() {
        stream::Sketches::TwoSided { y_c, y_r, z } => {
            y_c.write_to(a.out.join("y_c.mat"))?;
            y_r.write_to(a.out.join("y_r.mat"))?;
            z.write_to(a.out.join("z.mat"))?;
        }
        stream::Sketches::OneSided { y, z } => {
            y.write_to(a.out.join("y.mat"))?;
            z.write_to(a.out.join("z.mat"))?;
        }
    }
    fs::write(
        a.out.join("state.json"),
        serde_json::to_string_pretty(&state_json(&state))?,
    )?;
    Ok(())
}

fn materialize(input: &Path) -> Result<DenseMatrix> {
    let ((m, n), ups) = stream::read_stream(input)?;
    let cells = m.saturating_mul(n);
    if cells > bench::DEFAULT_ORACLE_CAP {
        return Err(sketchlrf::Error::OracleTooLarge {
            cells,
            cap: bench::DEFAULT_ORACLE_CAP,
        }
        .into());
    }
    let mut a = vec![0.0; cells];
    for u in ups {
        a[u.i * n + u.j] += u.delta;
    }
    Ok(DenseMatrix::new(m, n, a)?)
}

fn factorize(a: RunArgs, private: bool) -> Result<()> {
    if private && a.common.mode == Mode::NonPrivate {
        bail!("dp-factorize needs --mode priv1 or priv2");
    }
    if !private && a.common.mode != Mode::NonPrivate {
        bail!("use dp-factorize for private modes");
    }
    let state = ingest(&a.input, &a.common)?;
    let mut report = bench::factorize_state(
        &state,
        a.common.k,
        sketchlrf::rng::derive(a.common.seed, sketchlrf::rng::Role::Noise1),
    )?;
    if a.oracle {
        report.evaluate(&materialize(&a.input)?)?;
    }
    write_factorization(&a.out, &report, &state, a.common.seed)
}

fn write_factorization(dir: &Path, report: &LrfReport, state: &SketchState, seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let f = &report.factorization;
    f.u.write_to(dir.join("u.mat"))?;
    DenseMatrix::new(f.k(), 1, f.sigma.clone())?.write_to(dir.join("sigma.vec"))?;
    f.v.write_to(dir.join("v.mat"))?;
    let s = report.summary();
    let body = json!({
        "residual_fro": s.residual_fro,
        "oracle_residual_fro": s.oracle_residual_fro,
        "ratio": s.ratio,
        "k": s.k,
        "effective_rank": s.effective_rank,
        "degenerate": s.degenerate,
        "dims": state.dims(),
        "seed": seed,
        "mode": state.mode(),
        "noise": s.noise,
        "wall_time_ms": s.wall_time_ms,
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&body)?)?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn audit(a: AuditArgs) -> Result<()> {
    let level = a.common.mode.level().context("audit needs --mode priv1 or priv2")?;
    let state = SketchState::init(&a.common.state_config(a.m, a.n)?)?;
    let (rows, cols) = match level {
        PrivacyLevel::Priv1 if state.is_transposed() => (a.n, a.m),
        _ => (a.m, a.n),
    };
    let report = dp::sensitivity_audit(
        level,
        a.common.alpha,
        rows,
        cols,
        &dp::state_probes(&state),
        a.trials,
        a.common.seed,
    )?;
    emit(&a.out, &serde_json::to_string_pretty(&report)?)?;
    if !report.passed() {
        log::warn!("audit flagged at least one probe");
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<ExitCode> {
    let c = &a.common;
    let cfg = ExperimentConfig {
        mode: c.mode,
        epsilon: c.epsilon,
        delta: c.delta,
        trials: a.trials,
        seed: c.seed,
        regression_kind: c.sketch,
        affine_kind: c.sketch,
        c: c.c,
        data_rank: a.data_rank,
        noise_level: a.noise,
        dims: c.t.zip(c.v),
        oracle: !a.no_oracle,
        timing: a.timing,
        thresholds: Thresholds {
            min_success_rate: a.min_success_rate,
            min_exact_rate: None,
        },
        ..ExperimentConfig::new(a.m, a.n, c.k, c.alpha)
    };
    let report = bench::run_experiment(&cfg)?;
    emit(&a.out, &report.to_json()?)?;
    Ok(if report.summary.thresholds_met {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
