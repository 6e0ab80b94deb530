//! Training runs on sampled graphs: community separation on the
//! counterexample SBM and function approximation on an interval.

use ndarray::Array2;

use super::table::{fmt, Table};
use super::Config;
use crate::error::{Error, Result};
use crate::gnn::{IdentifierStrategy, Readout};
use crate::limit::network_limit;
use crate::models::{counterexample_spec, ModelSpec, Point};
use crate::sampler::{AlphaRule, EdgeMode};
use crate::train::{log_softmax, train, Architecture, LossKind, TargetKind, TrainConfig, TrainOutput};

pub const HISTORY_HEADER: [&str; 3] = ["epoch", "loss", "test_metric"];

fn history_table(name: &str, out: &TrainOutput) -> Table {
    let mut t = Table::new(name, &HISTORY_HEADER);
    for h in &out.history {
        t.push(vec![h.epoch.to_string(), fmt(h.loss), h.test_metric.map(fmt).unwrap_or_default()]);
    }
    t
}

fn latent_label(p: &Point) -> String {
    match p {
        Point::Class(k) => k.to_string(),
        Point::Real(x) => fmt(*x),
        Point::Sphere(v) => v.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(";"),
    }
}

#[derive(Clone, Debug)]
pub struct SeparationRun {
    pub arch: String,
    pub seed: u64,
    pub accuracy: f64,
    /// Largest difference between classes of the continuous limit with the trained weights
    /// (GNN only; `None` for the SGNN).
    pub limit_spread: Option<f64>,
    pub output: TrainOutput,
}

/// Both architectures of the community-separation experiment.
pub fn separation_configs(cfg: &mut Config) -> Result<Vec<(String, TrainConfig)>> {
    let fast: bool = cfg.get("fast", "false")?;
    let model = cfg.model(&counterexample_spec(0.9))?.build()?;
    let alpha: AlphaRule = cfg.get("alpha", "const:1")?;
    let mode: EdgeMode = cfg.get("mode", "bernoulli")?;
    let train_graphs: usize = cfg.get("train_graphs", "5")?;
    let train_n: usize = cfg.get("train_n", "80")?;
    let test_n: usize = cfg.get("test_n", "300")?;
    let lr: f64 = cfg.get("lr", "0.001")?;
    let eval_every: usize = cfg.get("eval_every", "50")?;
    let (gnn_width, gnn_epochs, sgnn_epochs) = if fast { ("64", "500", "250") } else { ("250", "2000", "1000") };
    let w = cfg.str("gnn_width", gnn_width);
    let gnn = cfg.gnn("gnn_", &format!("1,{w},{w},{w},{w},{w}"), "1", "2", "relu")?;
    let gnn_epochs: usize = cfg.get("gnn_epochs", gnn_epochs)?;
    let inner = cfg.gnn("inner_", "1,50,50", "1", "", "relu")?;
    let outer = cfg.gnn("outer_", "50,50,50", "1", "2", "relu")?;
    let strategy: IdentifierStrategy = cfg.get("strategy", "two_hop")?;
    let sgnn_epochs: usize = cfg.get("sgnn_epochs", sgnn_epochs)?;
    let base = TrainConfig {
        model,
        arch: Architecture::Gnn(gnn.clone()),
        loss: LossKind::CrossEntropy,
        target: TargetKind::Community,
        epochs: gnn_epochs,
        train_graphs,
        train_n,
        test_n,
        mode,
        alpha,
        seed: 0,
        lr,
        eval_every,
    };
    let mut s = base.clone();
    s.arch = Architecture::Sgnn { inner, outer, strategy };
    s.epochs = sgnn_epochs;
    let archs: Vec<String> = cfg.list("archs", "gnn,sgnn")?;
    let mut out = Vec::new();
    for a in archs {
        match a.as_str() {
            "gnn" => out.push((a, base.clone())),
            "sgnn" => out.push((a, s.clone())),
            other => return Err(Error::Config(format!("unknown architecture '{other}'"))),
        }
    }
    Ok(out)
}

pub fn separation_run(arch: &str, config: &TrainConfig) -> Result<SeparationRun> {
    let output = train(config)?;
    let limit_spread = if arch == "gnn" {
        let f = network_limit(&output.net, &config.model, Readout::Equivariant)?.function().expect("equivariant");
        let v = &f.values;
        let mut worst: f64 = 0.0;
        for r in 1..v.nrows() {
            for c in 0..v.ncols() {
                worst = worst.max((v[[r, c]] - v[[0, c]]).abs());
            }
        }
        Some(worst)
    } else {
        None
    };
    Ok(SeparationRun { arch: arch.to_string(), seed: 0, accuracy: output.test_metric, limit_spread, output })
}

pub const SEPARATION_HEADER: [&str; 4] = ["arch", "seed", "test_accuracy", "cgnn_class_spread"];
pub const SIGNAL_HEADER: [&str; 4] = ["node", "latent", "target", "output"];

fn signal_table(name: &str, out: &TrainOutput, target: TargetKind) -> Table {
    let mut t = Table::new(name, &SIGNAL_HEADER);
    let shown: Array2<f64> = match target {
        TargetKind::Community => log_softmax(&out.test_output),
        _ => out.test_output.clone(),
    };
    for (i, x) in out.test_graph.latents.iter().enumerate() {
        let y = match (target, x) {
            (TargetKind::Community, Point::Class(k)) => *k as f64,
            (_, Point::Real(v)) => target.eval(*v),
            _ => f64::NAN,
        };
        t.push(vec![i.to_string(), latent_label(x), fmt(y), fmt(shown[[i, 0]])]);
    }
    t
}

/// Seeds `0..trials` for both architectures.
pub fn run_separation(cfg: &mut Config, tables: &mut Vec<Table>) -> Result<Vec<SeparationRun>> {
    let trials: usize = cfg.get("trials", "5")?;
    let master: u64 = cfg.get("seed", "0")?;
    let configs = separation_configs(cfg)?;
    let mut summary = Table::new("sbm-separation", &SEPARATION_HEADER);
    let mut runs = Vec::new();
    let mut failure = None;
    'outer: for t in 0..trials {
        for (arch, base) in &configs {
            let mut c = base.clone();
            c.seed = crate::rng::mix(master, t as u64);
            match separation_run(arch, &c) {
                Ok(mut run) => {
                    run.seed = t as u64;
                    summary.push(vec![
                        arch.clone(),
                        t.to_string(),
                        fmt(run.accuracy),
                        run.limit_spread.map(fmt).unwrap_or_default(),
                    ]);
                    tables.push(history_table(&format!("history_{arch}_seed{t}"), &run.output));
                    tables.push(signal_table(&format!("signal_{arch}_seed{t}"), &run.output, TargetKind::Community));
                    runs.push(run);
                }
                Err(e) => {
                    failure = Some(e);
                    break 'outer;
                }
            }
        }
    }
    tables.insert(0, summary);
    match failure {
        Some(e) => Err(e),
        None => Ok(runs),
    }
}

/// One function-approximation case: a distribution and a target.
#[derive(Clone, Debug)]
pub struct RadialCase {
    pub label: String,
    pub dist: String,
    pub target: TargetKind,
}

pub fn radial_cases(cfg: &mut Config) -> Result<Vec<RadialCase>> {
    let list: Vec<String> = cfg.list("cases", "uniform/cos:5,uniform/sin:5,skewed/sin:5")?;
    list.iter()
        .map(|c| {
            let (dist, target) = c.split_once('/').ok_or_else(|| Error::Config(format!("case '{c}' should be DIST/TARGET")))?;
            Ok(RadialCase { label: c.replace([':', '/'], "_"), dist: dist.to_string(), target: target.parse()? })
        })
        .collect()
}

pub fn radial_config(cfg: &mut Config, case: &RadialCase) -> Result<TrainConfig> {
    let fast: bool = cfg.get("fast", "false")?;
    let space = cfg.str("space", "interval:-1,1");
    let kernel = cfg.str("kernel", "gaussian:sigma=0.5");
    let mut spec = ModelSpec::new(&space, &kernel, &case.dist);
    spec.grid = Some(cfg.get("grid", "512")?);
    let model = spec.build()?;
    let inner = cfg.gnn("inner_", "1,24,24", "0", "", "relu")?;
    let outer = cfg.gnn("outer_", "24,32", "1", "1", "relu")?;
    let strategy: IdentifierStrategy = cfg.get("strategy", "two_hop")?;
    Ok(TrainConfig {
        model,
        arch: Architecture::Sgnn { inner, outer, strategy },
        loss: LossKind::Square,
        target: case.target,
        epochs: cfg.get("epochs", if fast { "300" } else { "1000" })?,
        train_graphs: cfg.get("train_graphs", "5")?,
        train_n: cfg.get("train_n", "150")?,
        test_n: cfg.get("test_n", "400")?,
        mode: cfg.get("mode", "bernoulli")?,
        alpha: cfg.get("alpha", "cuberoot:c=5")?,
        seed: 0,
        lr: cfg.get("lr", "0.001")?,
        eval_every: cfg.get("eval_every", "50")?,
    })
}

pub const RADIAL_HEADER: [&str; 5] = ["case", "dist", "target", "seed", "test_mse"];

#[derive(Clone, Debug)]
pub struct RadialRun {
    pub case: String,
    pub seed: u64,
    pub mse: f64,
}

pub fn run_radial(cfg: &mut Config, tables: &mut Vec<Table>) -> Result<Vec<RadialRun>> {
    let trials: usize = cfg.get("trials", "5")?;
    let master: u64 = cfg.get("seed", "0")?;
    let cases = radial_cases(cfg)?;
    let configs = cases.iter().map(|c| radial_config(cfg, c)).collect::<Result<Vec<_>>>()?;
    let mut summary = Table::new("radial-approx", &RADIAL_HEADER);
    let mut runs = Vec::new();
    let mut failure = None;
    'outer: for (case, base) in cases.iter().zip(&configs) {
        for t in 0..trials {
            let mut c = base.clone();
            c.seed = crate::rng::mix(master, t as u64);
            match train(&c) {
                Ok(out) => {
                    summary.push(vec![case.label.clone(), case.dist.clone(), case.target.describe(), t.to_string(), fmt(out.test_metric)]);
                    tables.push(history_table(&format!("history_{}_seed{t}", case.label), &out));
                    tables.push(signal_table(&format!("signal_{}_seed{t}", case.label), &out, case.target));
                    runs.push(RadialRun { case: case.label.clone(), seed: t as u64, mse: out.test_metric });
                }
                Err(e) => {
                    failure = Some(e);
                    break 'outer;
                }
            }
        }
    }
    tables.insert(0, summary);
    match failure {
        Some(e) => Err(e),
        None => Ok(runs),
    }
}
