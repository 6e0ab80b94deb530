//! Rate fits on experiment CSVs and the bound-constant audit.

use std::collections::BTreeMap;
use std::path::Path;

use super::conv::{gnn_setup, sgnn_setup, ConvSetup};
use super::table::{fmt, Table};
use super::Config;
use crate::bounds::{median, rate_audit, rate_dominance, theorem_constants, Architecture, BoundReport, ModelMeta, RateFit};
use crate::error::{Error, Result};
use crate::gnn::{IdentifierStrategy, Network};
use crate::sampler::EdgeMode;

/// Parses `key=value;key=value` filters.
pub fn parse_filters(s: &str) -> Result<Vec<(String, String)>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("filter '{t}' should be key=value")))
        })
        .collect()
}

/// `(n, statistic)` pairs of `column` from rows matching every filter.
pub fn select(table: &Table, filters: &[(String, String)], column: &str) -> Result<Vec<(f64, f64)>> {
    let mut t = table.clone();
    for (k, v) in filters {
        t = t.filter(k, v).ok_or_else(|| Error::Data(format!("no column '{k}' in {}", table.name)))?;
    }
    let ns = t.floats("n").ok_or_else(|| Error::Data("missing or non-numeric column 'n'".into()))?;
    let ys = t.floats(column).ok_or_else(|| Error::Data(format!("missing or non-numeric column '{column}'")))?;
    Ok(ns.into_iter().zip(ys).collect())
}

pub fn fit_file(path: &Path, filters: &[(String, String)], column: &str) -> Result<RateFit> {
    rate_audit(&select(&Table::read(path)?, filters, column)?)
}

pub const FIT_HEADER: [&str; 4] = ["slope", "intercept", "residual", "points"];
pub const MEDIANS_HEADER: [&str; 2] = ["n", "median"];

pub fn run_rate_fit(cfg: &mut Config, tables: &mut Vec<Table>) -> Result<RateFit> {
    let input = cfg.str("input", "");
    if input.is_empty() {
        return Err(Error::Config("rate-fit needs --input".into()));
    }
    let filters = parse_filters(&cfg.str("filter", ""))?;
    let column = cfg.str("column", "mse");
    let fit = fit_file(Path::new(&input), &filters, &column)?;
    let mut t = Table::new("rate-fit", &FIT_HEADER);
    t.push(vec![fmt(fit.slope), fmt(fit.intercept), fmt(fit.residual), fit.medians.len().to_string()]);
    let mut m = Table::new("rate-fit-medians", &MEDIANS_HEADER);
    for (n, v) in &fit.medians {
        m.push(vec![fmt(*n), fmt(*v)]);
    }
    tables.push(t);
    tables.push(m);
    Ok(fit)
}

/// Reads the `# config:` line of a CSV written by this crate.
pub fn config_of(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)?;
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("# config:"))
        .ok_or_else(|| Error::Data(format!("{} has no config comment", path.display())))?;
    let mut c = Config::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| Error::Data(format!("bad config token '{tok}'")))?;
        c.set(k, v);
    }
    Ok(c)
}

fn identifier_rate(strategy: IdentifierStrategy, mode: EdgeMode, n: f64, alpha: f64) -> f64 {
    match (strategy, mode) {
        (IdentifierStrategy::OneHot, _) => 1.0 / n.sqrt(),
        (IdentifierStrategy::OneHop, EdgeMode::Deterministic) => 0.0,
        (IdentifierStrategy::OneHop, EdgeMode::Bernoulli) => (1.0 / alpha).sqrt(),
        (IdentifierStrategy::TwoHop, EdgeMode::Deterministic) => 1.0 / n.sqrt(),
        (IdentifierStrategy::TwoHop, EdgeMode::Bernoulli) => 1.0 / (alpha * n.sqrt()),
    }
}

fn report_for(setup: &ConvSetup, net: &Network) -> Result<(BoundReport, Option<IdentifierStrategy>)> {
    match net {
        Network::Gnn(p) => Ok((theorem_constants(Architecture::Gnn(p), &ModelMeta::for_gnn(&setup.model, 1.0))?, None)),
        Network::Sgnn { inner, outer, strategy } => {
            let meta = ModelMeta::for_sgnn(&setup.model, *strategy)?;
            Ok((theorem_constants(Architecture::Sgnn { inner, outer }, &meta)?, Some(*strategy)))
        }
    }
}

pub const AUDIT_HEADER: [&str; 7] = ["mode", "strategy", "n", "median", "bound", "ratio", "holds"];

/// Rebuilds the networks of a prior `conv-gnn`/`conv-sgnn` run from its
/// config comment, reports their constants and checks rate dominance of the
/// per-`n` medians by `R₁ + R₂ (+ R₃) (+ C'·identifier rate)`.
pub fn run_bound_audit(cfg: &mut Config, tables: &mut Vec<Table>) -> Result<bool> {
    let input = cfg.str("input", "");
    if input.is_empty() {
        return Err(Error::Config("bound-audit needs --input".into()));
    }
    let rho: f64 = cfg.get("rho", "0.05")?;
    let slack: f64 = cfg.get("slack", "2")?;
    let column = cfg.str("column", "mse");
    let path = Path::new(&input);
    let data = Table::read(path)?;
    let mut prior = config_of(path)?;
    let strategies = data.column("strategy").map(|c| data.rows.iter().map(|r| r[c].clone()).collect::<Vec<_>>()).unwrap_or_default();
    let setup = if strategies.iter().all(|s| s == "none") { gnn_setup(&mut prior)? } else { sgnn_setup(&mut prior)? };
    let mut audit = Table::new("bound-audit", &AUDIT_HEADER);
    let mut all_hold = true;
    for (label, net) in &setup.nets {
        let (report, strategy) = report_for(&setup, net)?;
        let mut t = Table::new(&format!("bound-report-{label}"), &["name", "value", "variant"]);
        for c in &report.constants {
            t.push(vec![c.name.clone(), fmt(c.value), c.variant.to_string()]);
        }
        tables.push(t);
        let variant = if report.r1(1.0, rho) > 0.0 { "literal" } else { "safe" };
        let cprime = match report.kind {
            crate::bounds::BoundKind::Gnn => 0.0,
            crate::bounds::BoundKind::Sgnn => report.get("C'").unwrap_or(0.0),
        };
        for mode in &setup.modes {
            let rows = select(&data, &[("mode".into(), mode.name().into()), ("strategy".into(), label.clone())], &column)?;
            if rows.is_empty() {
                continue;
            }
            let mut by_n: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            for (n, v) in rows {
                by_n.entry(n as u64).or_default().push(v);
            }
            let medians: Vec<(f64, f64)> = by_n.into_iter().map(|(n, mut v)| (n as f64, median(&mut v))).collect();
            let alpha_rule = setup.alpha;
            let invariant = setup.readout == crate::gnn::Readout::Invariant;
            let bound = |n: f64| {
                let alpha = alpha_rule.alpha(n as usize);
                let mut b = report.r1_variant(n, rho, variant);
                if *mode == EdgeMode::Bernoulli {
                    b += report.r2(n, alpha, 1.0);
                }
                if invariant {
                    b += report.r3(n, rho);
                }
                if let Some(s) = strategy {
                    b += cprime * identifier_rate(s, *mode, n, alpha);
                }
                b
            };
            let dom = rate_dominance(&medians, bound, slack)?;
            all_hold &= dom.holds;
            for ((n, med), (_, ratio)) in medians.iter().zip(&dom.ratios) {
                audit.push(vec![
                    mode.name().to_string(),
                    label.clone(),
                    fmt(*n),
                    fmt(*med),
                    fmt(dom.constant * bound(*n)),
                    fmt(*ratio),
                    (*ratio <= 1.0).to_string(),
                ]);
            }
        }
    }
    tables.insert(0, audit);
    Ok(all_hold)
}
