//! `rovella`: batch harness for the rovella-core experiments.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input or configuration,
//! 3 the run completed but reports a failed hypothesis.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rovella_core::Error;

use crate::config::{config_path, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "rovella", version, about = "Seeded experiments on a multidimensional Rovella-type attractor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Invocation {
    /// JSON run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Torusphere orbit with cocycle factors (CSV)
    Orbit(Invocation),
    /// Tent conjugacy table of g0 (CSV)
    Conjugacy(Invocation),
    /// Fixed points and multipliers (JSON)
    FixedPoints(Invocation),
    /// Meridian and parallel Lyapunov exponents over an ensemble (JSON)
    Lyapunov(Invocation),
    /// Pliss times of a sequence read from --input (JSON)
    Pliss(Invocation),
    /// Hyperbolic times of an orbit or of `psi,d` columns from --input (JSON)
    Hyptimes(Invocation),
    /// Two-stage Pliss pipeline with all intermediate constants (JSON)
    Abv0(Invocation),
    /// Orbit of the cross-section return map (CSV)
    ReturnMap(Invocation),
    /// Domination ratio profile near the critical parallel (CSV)
    Domination(Invocation),
    /// Solenoid attractor samples (CSV)
    Solenoid(Invocation),
    /// Occupation histogram of a typical orbit (CSV)
    Density(Invocation),
    /// Recurrence to the turning point over an ensemble (JSON)
    Recurrence(Invocation),
    /// Basin of an attracting fixed point on a grid (JSON)
    Basin(Invocation),
    /// Convergence of mean return times (JSON)
    Integrability(Invocation),
    /// Empirical checks of the expansion conditions (JSON)
    ProbeConditions(Invocation),
}

impl Command {
    fn split(self) -> (&'static str, Invocation) {
        match self {
            Command::Orbit(i) => ("orbit", i),
            Command::Conjugacy(i) => ("conjugacy", i),
            Command::FixedPoints(i) => ("fixed-points", i),
            Command::Lyapunov(i) => ("lyapunov", i),
            Command::Pliss(i) => ("pliss", i),
            Command::Hyptimes(i) => ("hyptimes", i),
            Command::Abv0(i) => ("abv0", i),
            Command::ReturnMap(i) => ("return-map", i),
            Command::Domination(i) => ("domination", i),
            Command::Solenoid(i) => ("solenoid", i),
            Command::Density(i) => ("density", i),
            Command::Recurrence(i) => ("recurrence", i),
            Command::Basin(i) => ("basin", i),
            Command::Integrability(i) => ("integrability", i),
            Command::ProbeConditions(i) => ("probe-conditions", i),
        }
    }
}

/// Invalid input or configuration (exit code 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Invalid>().is_some() || err.downcast_ref::<serde_json::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Hypothesis(_)) => 3,
        Some(
            Error::Domain { .. }
            | Error::InvalidParameter(_)
            | Error::LengthMismatch { .. }
            | Error::InsufficientData(_)
            | Error::NonDifferentiable(_)
            | Error::StableManifold
            | Error::ProjectionUndefined
            | Error::Pole(_),
        ) => 2,
        _ => 1,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ROVELLA_THREADS") {
        let n: usize = v.parse().map_err(|_| Invalid(format!("ROVELLA_THREADS={v} is not a thread count")))?;
        if n == 0 {
            anyhow::bail!(Invalid("ROVELLA_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    init_threads()?;
    let (name, inv) = cli.command.split();
    let mut cfg = match &inv.config {
        Some(path) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => RunConfig::default(),
    };
    if !cfg.command.is_empty() && cfg.command != name {
        anyhow::bail!(Invalid(format!("config is for command {}, not {name}", cfg.command)));
    }
    cfg.overlay(&inv.flags);
    cfg.command = name.to_string();

    let out = commands::run(name, &mut cfg)?;
    let path = cfg.out.get_or_insert_with(|| PathBuf::from(format!("{name}.{}", out.extension))).clone();
    std::fs::write(&path, &out.content).with_context(|| format!("writing {}", path.display()))?;
    let mut effective = cfg.to_json();
    effective.push('\n');
    std::fs::write(config_path(&path), effective)?;
    println!("{}", out.summary);
    Ok(!out.hypothesis_failure)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
