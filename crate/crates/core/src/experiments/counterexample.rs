//! The two-community SBM family with constant degree function.

use ndarray::Array2;

use super::table::{fmt, Table};
use super::Config;
use crate::error::{Error, Result};
use crate::gnn::{GnnParams, GnnSpec, IdentifierStrategy, Network, Readout};
use crate::limit::{cgnn_forward, csgnn_forward, LatentFunction};
use crate::models::{counterexample_model, GraphModel, Point};
use crate::rng::stream_rng;
use crate::sampler::{sample_graph, EdgeMode};

/// `γ⁴/16 − γ³/12 + γ²/24 − γ/108 + 17/1296`.
pub fn quartic(gamma: f64) -> f64 {
    gamma.powi(4) / 16.0 - gamma.powi(3) / 12.0 + gamma.powi(2) / 24.0 - gamma / 108.0 + 17.0 / 1296.0
}

/// Inner network with no layers and an exact-square head; identity outer network.
pub fn square_sgnn() -> (GnnParams, GnnParams) {
    let inner = GnnParams::zeros(&GnnSpec::new(&[1], 0, &[]).with_square_head()).expect("valid spec");
    let outer = GnnParams::zeros(&GnnSpec::new(&[1], 0, &[])).expect("valid spec");
    (inner, outer)
}

/// Invariant two-hop c-SGNN `∫∫ η(x, y)² dP dP` on the counterexample model.
pub fn quartic_csgnn(gamma: f64) -> Result<f64> {
    let model = counterexample_model(gamma)?;
    let (inner, outer) = square_sgnn();
    let v = csgnn_forward(&inner, &outer, &model, IdentifierStrategy::TwoHop, Readout::Invariant)?;
    Ok(v.vector().expect("invariant readout")[0])
}

/// Equivariant one-hop c-SGNN `x ↦ ∫ W(x, y)² dP(y)`, one value per class.
pub fn prop4_csgnn(model: &GraphModel) -> Result<Vec<f64>> {
    let (inner, outer) = square_sgnn();
    let f = csgnn_forward(&inner, &outer, model, IdentifierStrategy::OneHop, Readout::Equivariant)?;
    Ok(f.function().expect("equivariant readout").values.column(0).to_vec())
}

fn classes(model: &GraphModel) -> Result<usize> {
    match model.space {
        crate::models::LatentSpace::Finite { k } => Ok(k),
        _ => Err(Error::Config("counterexample experiments need a finite model".into())),
    }
}

/// Largest deviation of equivariant c-GNN outputs across classes and from `reference`.
fn cgnn_deviation(nets: &[GnnParams], model: &GraphModel, reference: Option<&[Array2<f64>]>) -> Result<(f64, Vec<Array2<f64>>)> {
    let mut worst: f64 = 0.0;
    let mut outs = Vec::with_capacity(nets.len());
    for (i, p) in nets.iter().enumerate() {
        let f0 = LatentFunction::constant(model, 1.0, p.input_dim);
        let v = cgnn_forward(p, model, &f0, Readout::Equivariant)?.function().expect("equivariant").values;
        for r in 1..v.nrows() {
            for c in 0..v.ncols() {
                worst = worst.max((v[[r, c]] - v[[0, c]]).abs());
            }
        }
        if let Some(reference) = reference {
            worst = worst.max((&v - &reference[i]).iter().fold(0.0f64, |m, x| m.max(x.abs())));
        }
        outs.push(v);
    }
    Ok((worst, outs))
}

fn random_cgnns(cfg: &mut Config) -> Result<Vec<GnnParams>> {
    let fast: bool = cfg.get("fast", "false")?;
    let draws: usize = cfg.get("draws", if fast { "10" } else { "50" })?;
    let spec = cfg.gnn("", "1,8,8", "2", "8,2", "relu")?;
    let bias: f64 = cfg.get("bias_scale", "0.5")?;
    let seed: u64 = cfg.get("seed", "0")?;
    (0..draws).map(|d| GnnParams::random(&spec, bias, &mut stream_rng(seed, &[0, d as u64]))).collect()
}

/// Columns `gamma,cgnn_spread,csgnn_value,polynomial_value`.
pub fn run_invariant(cfg: &mut Config, table: &mut Table) -> Result<()> {
    let gammas: Vec<f64> = cfg.list("gammas", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")?;
    let nets = random_cgnns(cfg)?;
    let mut reference: Option<Vec<Array2<f64>>> = None;
    for &g in &gammas {
        let model = counterexample_model(g)?;
        let (spread, outs) = cgnn_deviation(&nets, &model, reference.as_deref())?;
        reference.get_or_insert(outs);
        table.push(vec![fmt(g), fmt(spread), fmt(quartic_csgnn(g)?), fmt(quartic(g))]);
    }
    Ok(())
}

pub const INVARIANT_HEADER: [&str; 4] = ["gamma", "cgnn_spread", "csgnn_value", "polynomial_value"];
pub const EQUIVARIANT_HEADER: [&str; 6] = ["class", "csgnn_value", "oracle_value", "cgnn_spread", "discrete_mean", "separated"];

/// Columns `class,csgnn_value,oracle_value,cgnn_spread,discrete_mean,separated`.
pub fn run_equivariant(cfg: &mut Config, table: &mut Table) -> Result<()> {
    let gamma: f64 = cfg.get("gamma", "0.5")?;
    let fast: bool = cfg.get("fast", "false")?;
    let n: usize = cfg.get("n", if fast { "200" } else { "600" })?;
    let model = counterexample_model(gamma)?;
    let k = classes(&model)?;
    let values = prop4_csgnn(&model)?;
    let oracle: Vec<f64> = (0..k).map(|x| prop4_oracle(&model, x)).collect();
    let (spread, _) = cgnn_deviation(&random_cgnns(cfg)?, &model, None)?;

    let seed: u64 = cfg.get("seed", "0")?;
    let g = sample_graph(&model, n, EdgeMode::Deterministic, 1.0, &mut stream_rng(seed, &[1]))?;
    let (inner, outer) = square_sgnn();
    let out = Network::Sgnn { inner, outer, strategy: IdentifierStrategy::OneHop }.discrete(&g.adjacency, None, Readout::Equivariant)?;
    let mut sums = vec![(0.0, 0usize); k];
    for (i, x) in g.latents.iter().enumerate() {
        if let Point::Class(c) = x {
            sums[*c].0 += out[[i, 0]];
            sums[*c].1 += 1;
        }
    }
    let separated = (0..k).all(|a| (0..a).all(|b| (values[a] - values[b]).abs() > 1e-6));
    for c in 0..k {
        let mean = if sums[c].1 > 0 { sums[c].0 / sums[c].1 as f64 } else { f64::NAN };
        table.push(vec![
            c.to_string(),
            fmt(values[c]),
            fmt(oracle[c]),
            fmt(spread),
            fmt(mean),
            separated.to_string(),
        ]);
    }
    Ok(())
}

/// `Σ_y p_y W(x, y)²`.
pub fn prop4_oracle(model: &GraphModel, x: usize) -> f64 {
    let (nodes, weights) = model.dist.quadrature();
    nodes.iter().zip(&weights).map(|(y, p)| p * model.eval(&Point::Class(x), y).powi(2)).sum()
}
