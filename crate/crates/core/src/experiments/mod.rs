//! Reproducible experiments writing CSV tables, shared by the command line
//! front end and the acceptance tests.

pub mod audit;
pub mod concentration;
mod config;
pub mod conv;
pub mod counterexample;
mod table;
pub mod training;

pub use config::Config;
pub use table::{fmt, Table};

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    ConvGnn,
    ConvSgnn,
    CounterexampleInv,
    CounterexampleEq,
    SbmSeparation,
    RadialApprox,
    Concentration,
    BoundAudit,
    RateFit,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::ConvGnn,
        Experiment::ConvSgnn,
        Experiment::CounterexampleInv,
        Experiment::CounterexampleEq,
        Experiment::SbmSeparation,
        Experiment::RadialApprox,
        Experiment::Concentration,
        Experiment::BoundAudit,
        Experiment::RateFit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ConvGnn => "conv-gnn",
            Experiment::ConvSgnn => "conv-sgnn",
            Experiment::CounterexampleInv => "counterexample-inv",
            Experiment::CounterexampleEq => "counterexample-eq",
            Experiment::SbmSeparation => "sbm-separation",
            Experiment::RadialApprox => "radial-approx",
            Experiment::Concentration => "concentration",
            Experiment::BoundAudit => "bound-audit",
            Experiment::RateFit => "rate-fit",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Tables produced by a run and one-line summaries for the terminal.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
}

impl Report {
    /// Writes every table under `dir`, each preceded by `comment`.
    pub fn save(&self, dir: &Path, comment: &str) -> Result<()> {
        for t in &self.tables {
            t.save(dir, comment)?;
        }
        Ok(())
    }
}

/// Feeds results to `sink` in order and stops at the first error.
pub(crate) fn ordered_results<T>(results: Vec<Result<T>>, mut sink: impl FnMut(T)) -> Result<()> {
    for r in results {
        sink(r?);
    }
    Ok(())
}

fn conv(setup: conv::ConvSetup, name: &str, report: &mut Report) -> Result<()> {
    let mut t = Table::new(name, &conv::CONV_HEADER);
    let r = conv::run(&setup, &mut t);
    report.summary.push(format!("{} rows", t.rows.len()));
    report.tables.push(t);
    r
}

/// Runs `exp`. The report holds every table completed before a failure, so
/// partial results can still be written.
pub fn run(exp: Experiment, cfg: &mut Config) -> (Report, Result<()>) {
    let mut report = Report::default();
    let result = run_into(exp, cfg, &mut report);
    (report, result)
}

fn run_into(exp: Experiment, cfg: &mut Config, report: &mut Report) -> Result<()> {
    cfg.str("experiment", exp.name());
    match exp {
        Experiment::ConvGnn => conv(conv::gnn_setup(cfg)?, exp.name(), report),
        Experiment::ConvSgnn => conv(conv::sgnn_setup(cfg)?, exp.name(), report),
        Experiment::CounterexampleInv => {
            let mut t = Table::new(exp.name(), &counterexample::INVARIANT_HEADER);
            let r = counterexample::run_invariant(cfg, &mut t);
            report.tables.push(t);
            r
        }
        Experiment::CounterexampleEq => {
            let mut t = Table::new(exp.name(), &counterexample::EQUIVARIANT_HEADER);
            let r = counterexample::run_equivariant(cfg, &mut t);
            for row in &t.rows {
                report.summary.push(format!("class {}: csgnn {} oracle {}", row[0], row[1], row[2]));
            }
            report.tables.push(t);
            r
        }
        Experiment::SbmSeparation => {
            let runs = training::run_separation(cfg, &mut report.tables)?;
            for r in runs {
                report.summary.push(format!("{} seed {}: test accuracy {:.4}", r.arch, r.seed, r.accuracy));
            }
            Ok(())
        }
        Experiment::RadialApprox => {
            let runs = training::run_radial(cfg, &mut report.tables)?;
            for r in runs {
                report.summary.push(format!("{} seed {}: test mse {:.4}", r.case, r.seed, r.mse));
            }
            Ok(())
        }
        Experiment::Concentration => {
            let mut t = Table::new(exp.name(), &concentration::HEADER);
            let r = concentration::run(cfg, &mut t);
            report.tables.push(t);
            r
        }
        Experiment::BoundAudit => {
            let holds = audit::run_bound_audit(cfg, &mut report.tables)?;
            report.summary.push(format!("rate dominance holds: {holds}"));
            Ok(())
        }
        Experiment::RateFit => {
            let fit = audit::run_rate_fit(cfg, &mut report.tables)?;
            report.summary.push(format!("slope {} intercept {} residual {}", fit.slope, fit.intercept, fit.residual));
            Ok(())
        }
    }
}
