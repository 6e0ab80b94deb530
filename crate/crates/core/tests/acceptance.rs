//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! and then asserts the same condition.
//!
//! Run with `cargo test -p graphlimit --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use common::*;
use graphlimit::bounds::{lemma_bound_check, theorem_constants, Architecture, ModelMeta};
use graphlimit::experiments::counterexample::{prop4_csgnn, prop4_oracle, quartic_csgnn};
use graphlimit::experiments::training::{run_radial, run_separation};
use graphlimit::experiments::{concentration, conv, Config, Table};
use graphlimit::gnn::{Activation, GnnParams, GnnSpec, IdentifierStrategy, Network, Readout};
use graphlimit::limit::{cgnn_forward, LatentFunction};
use graphlimit::models::{counterexample_model, ModelSpec};
use graphlimit::rng::seeded;
use graphlimit::sampler::{sample_graph, EdgeMode};
use graphlimit::train::{grad_check, GradProblem, LossKind, Targets};
use ndarray::Array2;
use rand::Rng as _;

static SERIAL: Mutex<()> = Mutex::new(());

/// Criteria run one at a time so that their wall-clock budgets are meaningful.
fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(name: &str, pass: bool, detail: String, start: Instant) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    assert!(pass, "{name}: {detail}");
}

fn rows_where(t: &Table, filters: &[(&str, &str)]) -> Vec<Vec<String>> {
    let idx: Vec<(usize, &str)> = filters.iter().map(|(k, v)| (t.column(k).unwrap(), *v)).collect();
    t.rows.iter().filter(|r| idx.iter().all(|(i, v)| r[*i] == *v)).cloned().collect()
}

/// Slope of the per-`n` median of `column` on log-log axes.
fn median_slope(t: &Table, filters: &[(&str, &str)], column: &str) -> (f64, Vec<(f64, f64)>) {
    let (ni, ci) = (t.column("n").unwrap(), t.column(column).unwrap());
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in rows_where(t, filters) {
        by_n.entry(r[ni].parse().unwrap()).or_default().push(r[ci].parse().unwrap());
    }
    let meds: Vec<(f64, f64)> = by_n.into_iter().map(|(n, v)| (n as f64, median(&v))).collect();
    (loglog_slope(&meds), meds)
}

#[test]
fn quartic_counterexample() {
    let _guard = serial();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        let g = i as f64 / 10.0;
        let poly = g.powi(4) / 16.0 - g.powi(3) / 12.0 + g * g / 24.0 - g / 108.0 + 17.0 / 1296.0;
        worst = worst.max((quartic_csgnn(g).unwrap() - poly).abs());
    }
    let v0 = quartic_csgnn(0.0).unwrap();
    let v1 = quartic_csgnn(1.0).unwrap();
    let brute1 = two_class_quartic([[1.0, 0.0], [0.0, 0.5]], [1.0 / 3.0, 2.0 / 3.0]);
    let pass = worst <= 1e-12
        && (v0 - 17.0 / 1296.0).abs() <= 1e-12
        && (v1 - 2.0 / 81.0).abs() <= 1e-12
        && (brute1 - 2.0 / 81.0).abs() <= 1e-12
        && start.elapsed().as_secs_f64() < 1.0;
    verdict("quartic counterexample", pass, format!("max polynomial gap {worst:.2e}, value(0)={v0:.12}, value(1)={v1:.12}"), start);
}

#[test]
fn cgnn_degree_blindness() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = GnnParams::random(&GnnSpec::new(&[1, 8, 8], 2, &[8, 2]), 0.5, &mut rng).unwrap();
        let eval = |g: f64| {
            let m = counterexample_model(g).unwrap();
            cgnn_forward(&p, &m, &LatentFunction::constant(&m, 1.0, 1), Readout::Equivariant).unwrap().function().unwrap().values
        };
        let base = eval(0.0);
        for i in 0..=10 {
            let v = eval(i as f64 / 10.0);
            for c in 0..v.ncols() {
                for k in 0..2 {
                    worst = worst.max((v[[k, c]] - base[[0, c]]).abs());
                }
            }
        }
    }
    let pass = worst <= 1e-10 && start.elapsed().as_secs_f64() < 1.0;
    verdict("c-GNN degree blindness", pass, format!("50 draws, max spread across classes and gamma {worst:.2e}"), start);
}

#[test]
fn equivariant_counterexample_values() {
    let _guard = serial();
    let start = Instant::now();
    let m = counterexample_model(0.5).unwrap();
    let v = prop4_csgnn(&m).unwrap();
    let oracle = [prop4_oracle(&m, 0), prop4_oracle(&m, 1)];
    let gap = (v[0] - 1.0 / 8.0).abs().max((v[1] - 11.0 / 96.0).abs());
    let pass = gap <= 1e-12 && (oracle[0] - 1.0 / 8.0).abs() <= 1e-12 && (oracle[1] - 11.0 / 96.0).abs() <= 1e-12;
    verdict("equivariant counterexample values", pass, format!("psi = ({:.15}, {:.15}), gap {gap:.2e}", v[0], v[1]), start);
}

#[test]
fn gnn_convergence_rate() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = Config::new();
    cfg.set("modes", "deterministic");
    let setup = conv::gnn_setup(&mut cfg).unwrap();
    let mut t = Table::new("conv-gnn", &conv::CONV_HEADER);
    conv::run(&setup, &mut t).unwrap();
    let (slope, meds) = median_slope(&t, &[("mode", "deterministic")], "mse");
    let pass = (-0.7..=-0.3).contains(&slope) && start.elapsed().as_secs_f64() < 300.0;
    let meds: Vec<String> = meds.iter().map(|(n, m)| format!("{n}:{m:.2e}")).collect();
    verdict("GNN convergence rate", pass, format!("slope {slope:.3}, medians {}", meds.join(" ")), start);
}

#[test]
fn sgnn_identifier_convergence() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = Config::new();
    cfg.set("strategies", "one_hop,two_hop");
    let setup = conv::sgnn_setup(&mut cfg).unwrap();
    let mut t = Table::new("conv-sgnn", &conv::CONV_HEADER);
    conv::run(&setup, &mut t).unwrap();
    let (one_hop, _) = median_slope(&t, &[("mode", "bernoulli"), ("strategy", "one_hop")], "paired_diff");
    let (two_hop, _) = median_slope(&t, &[("mode", "bernoulli"), ("strategy", "two_hop")], "paired_diff");
    let (det, _) = median_slope(&t, &[("mode", "deterministic"), ("strategy", "two_hop")], "mse");
    let pass = one_hop > 0.1 && two_hop < -0.05 && (-0.7..=-0.3).contains(&det) && start.elapsed().as_secs_f64() < 1800.0;
    verdict(
        "SGNN identifier convergence",
        pass,
        format!("bernoulli one-hop slope {one_hop:.3}, bernoulli two-hop slope {two_hop:.3}, deterministic two-hop slope {det:.3}"),
        start,
    );
}

#[test]
fn adjacency_concentration() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = Config::new();
    let mut t = Table::new("concentration", &concentration::HEADER);
    concentration::run(&mut cfg, &mut t).unwrap();
    let (ni, ri, si) = (t.column("n").unwrap(), t.column("alpha_rule").unwrap(), t.column("scaled").unwrap());
    let mut groups: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in &t.rows {
        groups.entry(r[ri].clone()).or_default().entry(r[ni].parse().unwrap()).or_default().push(r[si].parse().unwrap());
    }
    let mut pass = groups.len() == 2;
    let mut detail = Vec::new();
    for (rule, by_n) in &groups {
        let meds: Vec<f64> = by_n.values().map(|v| median(v)).collect();
        let ratio = meds.iter().cloned().fold(f64::MIN, f64::max) / meds.iter().cloned().fold(f64::MAX, f64::min);
        pass &= ratio < 2.0 && by_n.len() == 4 && by_n.values().all(|v| v.len() == 20);
        detail.push(format!("{rule}: max/min median ratio {ratio:.3}"));
    }
    pass &= start.elapsed().as_secs_f64() < 300.0;
    verdict("adjacency concentration", pass, detail.join("; "), start);
}

#[test]
fn gradient_correctness() {
    let _guard = serial();
    let start = Instant::now();
    let n = 20;
    let model = ModelSpec::new("interval:-1,1", "gaussian:sigma=0.5", "uniform").build().unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = seeded(500 + seed);
        let a = sample_graph(&model, n, EdgeMode::Bernoulli, 0.5, &mut rng).unwrap().adjacency;
        let tanh = |dims: &[usize], head: &[usize]| GnnSpec::new(dims, 1, head).with_activation(Activation::Tanh);
        let gnn_spec = GnnSpec::new(&[2, 6, 5, 4], 2, &[3, 2]).with_activation(Activation::Tanh);
        let gnn = Network::Gnn(GnnParams::random(&gnn_spec, 0.3, &mut rng).unwrap());
        let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
        let classes = Targets::Classes((0..n).map(|i| i % 2).collect());
        let problem = GradProblem { a: &a, input: Some(&x), targets: &classes, loss: LossKind::CrossEntropy, readout: Readout::Equivariant };
        worst = worst.max(grad_check(&gnn, &problem, 1e-4, &mut rng).unwrap());

        let strategy = IdentifierStrategy::ALL[seed as usize % 3];
        let inner = GnnParams::random(&tanh(&[1, 4, 3], &[]), 0.3, &mut rng).unwrap();
        let outer = GnnParams::random(&tanh(&[3, 4, 3], &[2]), 0.3, &mut rng).unwrap();
        let sgnn = Network::Sgnn { inner, outer, strategy };
        let values = Targets::Values(Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0)));
        let problem = GradProblem { a: &a, input: None, targets: &values, loss: LossKind::Square, readout: Readout::Equivariant };
        worst = worst.max(grad_check(&sgnn, &problem, 1e-4, &mut rng).unwrap());
    }
    let pass = worst < 1e-4 && start.elapsed().as_secs_f64() < 60.0;
    verdict("gradient correctness", pass, format!("worst relative error {worst:.2e} over 10 seeds"), start);
}

#[test]
fn bound_internals() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = seeded(77);
    let finite = counterexample_model(0.3).unwrap();
    let grid = ModelSpec::new("interval:-1,1", "gaussian:sigma=0.5", "uniform").build().unwrap().with_resolution(128);
    let mut worst_ratio: f64 = 0.0;
    for model in [&finite, &grid] {
        for _ in 0..20 {
            let p = GnnParams::random(&GnnSpec::new(&[1, 6, 6, 4], 2, &[3]), 0.5, &mut rng).unwrap();
            for l in lemma_bound_check(&p, model, &LatentFunction::constant(model, 1.0, 1)).unwrap() {
                worst_ratio = worst_ratio.max(l.sup_ratio()).max(l.l2_ratio());
            }
        }
    }
    let mut worst_gap: f64 = 0.0;
    for _ in 0..20 {
        let p = GnnParams::random(&GnnSpec::new(&[1, 5, 4], 3, &[3, 1]), 0.5, &mut rng).unwrap();
        let meta = ModelMeta::for_gnn(&finite, 1.0);
        let report = theorem_constants(Architecture::Gnn(&p), &meta).unwrap();
        for (name, v) in transcribed_gnn_constants(&p, &meta) {
            worst_gap = worst_gap.max(relative_gap(report.get(&name).unwrap(), v));
        }
        let inner = GnnParams::random(&GnnSpec::new(&[1, 4, 3], 2, &[3]), 0.5, &mut rng).unwrap();
        let outer = GnnParams::random(&GnnSpec::new(&[3, 4], 2, &[1]), 0.5, &mut rng).unwrap();
        let meta = ModelMeta::for_sgnn(&grid, IdentifierStrategy::TwoHop).unwrap();
        let report = theorem_constants(Architecture::Sgnn { inner: &inner, outer: &outer }, &meta).unwrap();
        for (name, v) in transcribed_sgnn_constants(&inner, &outer, &meta) {
            worst_gap = worst_gap.max(relative_gap(report.get(&name).unwrap(), v));
        }
    }
    let pass = worst_ratio <= 1.0 && worst_gap <= 1e-10;
    verdict("bound internals", pass, format!("largest lemma ratio {worst_ratio:.4}, transcription gap {worst_gap:.2e}"), start);
}

#[test]
fn community_separation() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = Config::new();
    let mut tables = Vec::new();
    let runs = run_separation(&mut cfg, &mut tables).unwrap();
    let pick = |arch: &str| runs.iter().filter(|r| r.arch == arch).map(|r| r.accuracy).collect::<Vec<_>>();
    let (sgnn, gnn) = (pick("sgnn"), pick("gnn"));
    let spread = runs.iter().filter_map(|r| r.limit_spread).fold(0.0f64, f64::max);
    let (ms, mg) = (median(&sgnn), median(&gnn));
    let pass = sgnn.len() == 5
        && gnn.len() == 5
        && ms >= 0.9
        && mg <= 0.8
        && spread <= 1e-10
        && start.elapsed().as_secs_f64() < 1800.0;
    verdict(
        "community separation",
        pass,
        format!("median SGNN accuracy {ms:.3} {sgnn:?}, median GNN accuracy {mg:.3} {gnn:?}, c-GNN class spread {spread:.2e}"),
        start,
    );
}

#[test]
fn radial_function_approximation() {
    let _guard = serial();
    let start = Instant::now();
    let mut cfg = Config::new();
    let mut tables = Vec::new();
    let runs = run_radial(&mut cfg, &mut tables).unwrap();
    let med = |case: &str| median(&runs.iter().filter(|r| r.case == case).map(|r| r.mse).collect::<Vec<_>>());
    let (cos, sin, skew) = (med("uniform_cos_5"), med("uniform_sin_5"), med("skewed_sin_5"));
    let pass = runs.len() == 15 && cos <= 0.05 && sin >= 0.2 && skew <= 0.1 && start.elapsed().as_secs_f64() < 1200.0;
    verdict(
        "radial function approximation",
        pass,
        format!("median test MSE: symmetric cos {cos:.4}, symmetric sin {sin:.4}, skewed sin {skew:.4}"),
        start,
    );
}

#[test]
fn permutation_suite() {
    let _guard = serial();
    let start = Instant::now();
    let n = 20;
    let mut rng = seeded(99);
    let model = ModelSpec::new("interval:-1,1", "gaussian:sigma=0.5", "uniform").build().unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = sample_graph(&model, n, EdgeMode::Bernoulli, 0.6, &mut rng).unwrap().adjacency;
        let perm = random_permutation(n, &mut rng);
        let b = permute_adjacency(&a, &perm);
        let z = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
        let zp = permute_rows(&z, &perm);
        let gnn = Network::Gnn(GnnParams::random(&GnnSpec::new(&[2, 5, 4], 3, &[3]), 0.5, &mut rng).unwrap());
        let eq = gnn.discrete(&a, Some(&z), Readout::Equivariant).unwrap();
        worst = worst.max(max_abs_diff(&gnn.discrete(&b, Some(&zp), Readout::Equivariant).unwrap(), &permute_rows(&eq, &perm)));
        let inv = gnn.discrete(&a, Some(&z), Readout::Invariant).unwrap();
        worst = worst.max(max_abs_diff(&gnn.discrete(&b, Some(&zp), Readout::Invariant).unwrap(), &inv));
        for strategy in IdentifierStrategy::ALL {
            let inner = GnnParams::random(&GnnSpec::new(&[1, 3], 1, &[2]), 0.5, &mut rng).unwrap();
            let outer = GnnParams::random(&GnnSpec::new(&[2, 3], 2, &[1]), 0.5, &mut rng).unwrap();
            let sgnn = Network::Sgnn { inner, outer, strategy };
            let eq = sgnn.discrete(&a, None, Readout::Equivariant).unwrap();
            worst = worst.max(max_abs_diff(&sgnn.discrete(&b, None, Readout::Equivariant).unwrap(), &permute_rows(&eq, &perm)));
            let inv = sgnn.discrete(&a, None, Readout::Invariant).unwrap();
            worst = worst.max(max_abs_diff(&sgnn.discrete(&b, None, Readout::Invariant).unwrap(), &inv));
        }
    }
    verdict("permutation suite", worst <= 1e-10, format!("100 permutations, max deviation {worst:.2e}"), start);
}
