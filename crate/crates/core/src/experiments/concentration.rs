use rayon::prelude::*;

use super::table::{fmt, Table};
use super::{ordered_results, Config};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::rng::stream_rng;
use crate::sampler::{concentration_stat, sample_graph, AlphaRule, EdgeMode};

pub const HEADER: [&str; 6] = ["n", "alpha_rule", "alpha", "trial", "stat", "scaled"];

/// `‖A − W(X)‖/n` on Bernoulli graphs, and the same times `√(α n)`.
pub fn run(cfg: &mut Config, table: &mut Table) -> Result<()> {
    let model = cfg.model(&ModelSpec::new("interval:-1,1", "gaussian:sigma=0.5", "uniform"))?.build()?;
    let fast: bool = cfg.get("fast", "false")?;
    let ns = cfg.n_grid("ns", if fast { "100,200,400" } else { "200,400,800,1600" })?;
    let trials: usize = cfg.get("trials", if fast { "5" } else { "20" })?;
    let seed: u64 = cfg.get("seed", "0")?;
    let rules = cfg
        .str("alphas", "const:1;cuberoot")
        .split(';')
        .map(|s| s.trim().parse::<AlphaRule>())
        .collect::<Result<Vec<_>>>()?;
    if rules.is_empty() || trials == 0 {
        return Err(Error::Config("need at least one alpha rule and one trial".into()));
    }
    for (r, rule) in rules.iter().enumerate() {
        for &n in &ns {
            let alpha = rule.alpha(n);
            let results: Vec<_> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let g = sample_graph(&model, n, EdgeMode::Bernoulli, alpha, &mut stream_rng(seed, &[r as u64, n as u64, t as u64]))?;
                    concentration_stat(&g, &model)
                })
                .collect();
            let mut t = 0;
            ordered_results(results, |stat| {
                table.push(vec![
                    n.to_string(),
                    rule.describe(),
                    fmt(alpha),
                    t.to_string(),
                    fmt(stat),
                    fmt(stat * (alpha * n as f64).sqrt()),
                ]);
                t += 1;
            })?;
        }
    }
    Ok(())
}
