use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphlimit::experiments::{self, Config, Experiment};
use graphlimit::Error;

#[derive(Parser)]
#[command(name = "graphlimit", version, about = "Random-graph GNN convergence and approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// GNN versus c-GNN over an n grid, both edge modes
    ConvGnn(Common),
    /// SGNN versus c-SGNN for each identifier strategy, both edge modes
    ConvSgnn(Common),
    /// c-GNN blindness and the quartic c-SGNN value over a gamma grid
    CounterexampleInv(Common),
    /// Equivariant c-SGNN values on the counterexample model
    CounterexampleEq(Common),
    /// Community separation training runs (GNN and SGNN)
    SbmSeparation(Common),
    /// SGNN function approximation on an interval
    RadialApprox(Common),
    /// Spectral concentration of Bernoulli graphs versus n
    Concentration(Common),
    /// Bound constants and rate dominance for a prior conv run
    BoundAudit(Common),
    /// Log-log slope of per-n medians in a CSV
    RateFit(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of trials (or seeds for training runs)
    #[arg(long)]
    trials: Option<usize>,
    /// Reduced sizes for a quick run
    #[arg(long)]
    fast: bool,
    /// Input CSV (bound-audit, rate-fit)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Row filter key=value, repeatable (rate-fit)
    #[arg(long)]
    filter: Vec<String>,
    /// Extra setting key=value, repeatable
    #[arg(long = "set")]
    set: Vec<String>,
}

impl Command {
    fn split(&self) -> (Experiment, &Common) {
        match self {
            Command::ConvGnn(c) => (Experiment::ConvGnn, c),
            Command::ConvSgnn(c) => (Experiment::ConvSgnn, c),
            Command::CounterexampleInv(c) => (Experiment::CounterexampleInv, c),
            Command::CounterexampleEq(c) => (Experiment::CounterexampleEq, c),
            Command::SbmSeparation(c) => (Experiment::SbmSeparation, c),
            Command::RadialApprox(c) => (Experiment::RadialApprox, c),
            Command::Concentration(c) => (Experiment::Concentration, c),
            Command::BoundAudit(c) => (Experiment::BoundAudit, c),
            Command::RateFit(c) => (Experiment::RateFit, c),
        }
    }
}

fn build_config(c: &Common) -> Result<Config, Error> {
    let mut cfg = match &c.config {
        Some(p) => Config::from_file(p)?,
        None => Config::new(),
    };
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim());
    }
    if let Some(s) = c.seed {
        cfg.set("seed", &s.to_string());
    }
    if let Some(t) = c.trials {
        cfg.set("trials", &t.to_string());
    }
    if c.fast {
        cfg.set("fast", "true");
    }
    if let Some(i) = &c.input {
        cfg.set("input", &i.to_string_lossy());
    }
    if !c.filter.is_empty() {
        cfg.set("filter", &c.filter.join(";"));
    }
    Ok(cfg)
}

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Config(_))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("GRAPHLIMIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if t > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let (exp, common) = cli.command.split();
    let mut cfg = match build_config(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (report, result) = experiments::run(exp, &mut cfg);
    let unused = cfg.unused();
    if !unused.is_empty() {
        eprintln!("warning: unused settings: {}", unused.join(", "));
    }
    if let Err(e) = report.save(&common.out, &cfg.comment()) {
        eprintln!("error: writing results: {e}");
        return ExitCode::from(1);
    }
    for line in &report.summary {
        println!("{line}");
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
