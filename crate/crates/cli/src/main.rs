//! `ifdyn`: experiments on equivariant superconducting interfaces.
//!
//! Exit codes: 0 all checks pass, 1 compute failure, 2 config error,
//! 3 an embedded check failed.

mod artifacts;
mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use ifdyn::validation::StudyConfig;

use artifacts::{resolve_out, Artifacts, Check};
use config::{load, render, ConfigError, Experiment, Loaded};

#[derive(Parser)]
#[command(name = "ifdyn", version, about = "Interface dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Artifact directory (relative paths go under $IFDYN_ARTIFACT_ROOT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Set a config key, e.g. `spec.epsilon=0.05`. Repeatable; wins over the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Profiles F₀ over a range of radii and the μ(R) curve.
    ProfileSweep(Common),
    /// Spectrum of the linearized operator, coercivity audit and F₁ solvability.
    SpectrumMap(Common),
    /// Effective interface trajectory R(y⁰).
    EffectiveRun(Common),
    /// Trajectory started just above the quench radius, with envelope checks.
    QuenchStudy(Common),
    /// Direct simulation of the radial wave system from ansatz data.
    FullSim(Common),
    /// ε-convergence of the error against the ansatz.
    ConvergenceStudy(Common),
}

enum Failure {
    Config(String),
    Compute(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn classify(e: anyhow::Error) -> Failure {
    match e.downcast_ref::<ifdyn::Error>() {
        Some(ifdyn::Error::Config(m)) => Failure::Config(m.clone()),
        _ => Failure::Compute(e),
    }
}

fn execute<T: Experiment + Sync>(
    kind: &str,
    common: &Common,
    body: impl FnOnce(&T, u64, &mut Artifacts) -> Result<Vec<Check>> + Send,
) -> Result<bool, Failure> {
    let Loaded { config, seed } = load::<T>(common.config.as_deref(), kind, &common.overrides)?;
    let seed = common.seed.or(seed);
    let threads = common.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(Failure::Config("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Failure::Compute(e.into()))?;
    let dir = resolve_out(common.out.as_deref(), kind);
    let source = common.config.as_ref().map(|p| p.display().to_string());
    let mut art = Artifacts::create(dir, kind, source, threads, seed).map_err(Failure::Compute)?;
    let text = render(kind, seed, &config).map_err(|e| Failure::Compute(e.into()))?;
    art.write("config.toml", text).map_err(Failure::Compute)?;
    match pool.install(|| body(&config, seed.unwrap_or(0), &mut art)) {
        Ok(checks) => {
            let passed = art.finish_checks(&checks).map_err(Failure::Compute)?;
            for c in &checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                match c.lower {
                    Some(lo) => println!("{verdict} {} = {:e} (range [{lo:e}, {:e}])", c.name, c.value, c.limit),
                    None => println!("{verdict} {} = {:e} (limit {:e})", c.name, c.value, c.limit),
                }
            }
            art.write_manifest(if passed { "passed" } else { "checks-failed" }).map_err(Failure::Compute)?;
            println!("artifacts: {}", art.dir.display());
            Ok(passed)
        }
        Err(e) => {
            let failure = classify(e);
            let msg = match &failure {
                Failure::Config(m) => m.clone(),
                Failure::Compute(e) => format!("{e:#}"),
            };
            let _ = art.write_json("failure.json", &serde_json::json!({ "error": msg }));
            let _ = art.write_manifest("failed");
            Err(failure)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ProfileSweep(c) => execute("profile-sweep", c, |cfg, _, a| experiments::profile_sweep(cfg, a)),
        Command::SpectrumMap(c) => execute("spectrum-map", c, experiments::spectrum_map),
        Command::EffectiveRun(c) => execute("effective-run", c, |cfg, _, a| experiments::effective_run(cfg, a)),
        Command::QuenchStudy(c) => execute("quench-study", c, |cfg, _, a| experiments::quench_study(cfg, a)),
        Command::FullSim(c) => execute("full-sim", c, |cfg, _, a| experiments::full_sim(cfg, a)),
        Command::ConvergenceStudy(c) => {
            execute::<StudyConfig>("convergence-study", c, |cfg, _, a| experiments::convergence_study(cfg, a))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
