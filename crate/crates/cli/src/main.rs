//! `pressurelab`: batch front-end for pressure, dimension and stability experiments.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod checks;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "pressurelab", version, about = "Topological pressure and dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline selected by the config's mode.
    Run(Overrides),
    /// Run the invariant suite; exits nonzero iff a check fails.
    Verify(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Flat key=value experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dimension, pressure, lyapunov, stability, entropy or checks.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// First base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tol {
            cfg.tol = Some(t);
        }
        if let Some(s) = &self.eps_schedule {
            cfg.schedule = Some(s.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(overrides: &Overrides, verify: bool) -> Result<bool> {
    let mut cfg = overrides.load().context("config error")?;
    if verify {
        cfg.mode = Mode::Checks;
    }
    if let Some(k) = overrides.workers {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("starting worker pool")?;
    }
    let cache = std::env::var_os("PRESSURELAB_CACHE").map(PathBuf::from);
    let outcome = pipeline::run(&cfg, cache.as_deref());
    artifacts::write_run(&cfg, &outcome)?;
    for (k, v) in &outcome.summary {
        println!("{k}={v}");
    }
    for f in &outcome.failures {
        eprintln!("error: {f}");
    }
    println!("status={} out={}", if outcome.failures.is_empty() { "ok" } else { "failed" }, cfg.out.display());
    Ok(outcome.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => execute(o, false),
        Command::Verify(o) => execute(o, true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
