//! Discrete-versus-continuous convergence over an `n` grid, both edge modes.

use rayon::prelude::*;

use super::table::{fmt, Table};
use super::{ordered_results, Config};
use crate::error::Result;
use crate::gnn::{GnnParams, IdentifierStrategy, Network, Readout};
use crate::limit::{network_limit, output_distance, rms_rows, LimitOutput};
use crate::models::{GraphModel, ModelSpec};
use crate::rng::stream_rng;
use crate::sampler::{sample_edges, AlphaRule, EdgeMode};

pub const CONV_HEADER: [&str; 7] = ["n", "alpha", "mode", "strategy", "trial", "mse", "paired_diff"];

pub struct ConvSetup {
    pub model: GraphModel,
    /// One network per strategy label.
    pub nets: Vec<(String, Network)>,
    pub readout: Readout,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub modes: Vec<EdgeMode>,
    pub alpha: AlphaRule,
    pub seed: u64,
}

fn common(cfg: &mut Config, default_model: &ModelSpec, readout: &str) -> Result<(GraphModel, Readout, Vec<usize>, usize, Vec<EdgeMode>, AlphaRule, u64)> {
    let model = cfg.model(default_model)?.build()?;
    let readout = match cfg.str("readout", readout).as_str() {
        "invariant" => Readout::Invariant,
        "equivariant" => Readout::Equivariant,
        other => return Err(crate::Error::Config(format!("unknown readout '{other}'"))),
    };
    let fast: bool = cfg.get("fast", "false")?;
    let ns = cfg.n_grid("ns", if fast { "100,200,400" } else { "100,200,400,800,1600,3200" })?;
    let trials: usize = cfg.get("trials", if fast { "5" } else { "20" })?;
    if trials == 0 {
        return Err(crate::Error::Config("trials must be at least 1".into()));
    }
    let modes: Vec<EdgeMode> = cfg.list("modes", "deterministic,bernoulli")?;
    let alpha: AlphaRule = cfg.get("alpha", "cuberoot")?;
    let seed: u64 = cfg.get("seed", "0")?;
    Ok((model, readout, ns, trials, modes, alpha, seed))
}

/// Plain GNN on the constant input.
pub fn gnn_setup(cfg: &mut Config) -> Result<ConvSetup> {
    let (model, readout, ns, trials, modes, alpha, seed) =
        common(cfg, &crate::models::counterexample_spec(0.5), "equivariant")?;
    let spec = cfg.gnn("", "1,16,16", "2", "16,1", "relu")?;
    let bias: f64 = cfg.get("bias_scale", "0.5")?;
    let net = Network::Gnn(GnnParams::random(&spec, bias, &mut stream_rng(seed, &[0]))?);
    Ok(ConvSetup { model, nets: vec![("none".into(), net)], readout, ns, trials, modes, alpha, seed })
}

/// SGNN sharing one inner/outer parameter set across identifier strategies.
pub fn sgnn_setup(cfg: &mut Config) -> Result<ConvSetup> {
    let default = ModelSpec::new("interval:-1,1", "gaussian:sigma=0.5", "uniform");
    let (model, readout, ns, trials, modes, alpha, seed) = common(cfg, &default, "invariant")?;
    let inner_spec = cfg.gnn("inner_", "1,4", "0", "square", "relu")?;
    let outer_spec = cfg.gnn("outer_", "4,8", "1", "1", "relu")?;
    let strategies: Vec<IdentifierStrategy> = cfg.list("strategies", "one_hot,one_hop,two_hop")?;
    let bias: f64 = cfg.get("bias_scale", "0.5")?;
    let mut rng = stream_rng(seed, &[0]);
    let inner = GnnParams::random(&inner_spec, bias, &mut rng)?;
    let outer = GnnParams::random(&outer_spec, bias, &mut rng)?;
    let nets = strategies
        .into_iter()
        .map(|s| (s.name().to_string(), Network::Sgnn { inner: inner.clone(), outer: outer.clone(), strategy: s }))
        .collect();
    Ok(ConvSetup { model, nets, readout, ns, trials, modes, alpha, seed })
}

fn trial_rows(setup: &ConvSetup, limits: &[LimitOutput], n: usize, trial: usize) -> Result<Vec<Vec<String>>> {
    let path = [n as u64, trial as u64];
    let mut lrng = stream_rng(setup.seed, &[1, path[0], path[1]]);
    let latents: Vec<_> = (0..n).map(|_| setup.model.dist.sample(&mut lrng)).collect();
    let det = sample_edges(&setup.model, latents.clone(), EdgeMode::Deterministic, 1.0, &mut lrng)?;
    let alpha = setup.alpha.alpha(n);
    let bern = if setup.modes.contains(&EdgeMode::Bernoulli) {
        Some(sample_edges(&setup.model, latents.clone(), EdgeMode::Bernoulli, alpha, &mut stream_rng(setup.seed, &[2, path[0], path[1]]))?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for ((label, net), limit) in setup.nets.iter().zip(limits) {
        let out_det = net.discrete(&det.adjacency, None, setup.readout)?;
        for &mode in &setup.modes {
            let (mse, paired, a) = match mode {
                EdgeMode::Deterministic => (output_distance(&out_det, limit, &latents)?, 0.0, 1.0),
                EdgeMode::Bernoulli => {
                    let g = bern.as_ref().expect("sampled above");
                    let out = net.discrete(&g.adjacency, None, setup.readout)?;
                    (output_distance(&out, limit, &latents)?, rms_rows(&out, &out_det), alpha)
                }
            };
            rows.push(vec![
                n.to_string(),
                fmt(a),
                mode.name().to_string(),
                label.clone(),
                trial.to_string(),
                fmt(mse),
                fmt(paired),
            ]);
        }
    }
    Ok(rows)
}

/// Rows in `(n, trial)` order. On failure the rows finished before the
/// failing trial are kept in `table`.
pub fn run(setup: &ConvSetup, table: &mut Table) -> Result<()> {
    let limits = setup.nets.iter().map(|(_, net)| network_limit(net, &setup.model, setup.readout)).collect::<Result<Vec<_>>>()?;
    for &n in &setup.ns {
        let results: Vec<_> = (0..setup.trials).into_par_iter().map(|t| trial_rows(setup, &limits, n, t)).collect();
        ordered_results(results, |rows| rows.into_iter().for_each(|r| table.push(r)))?;
    }
    Ok(())
}
