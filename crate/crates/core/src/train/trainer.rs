use ndarray::Array2;
use rayon::prelude::*;

use super::adam::AdamState;
use super::loss::{accuracy, LossKind, Targets};
use super::loss_and_grad;
use crate::error::{Error, Result};
use crate::gnn::{GnnParams, GnnSpec, IdentifierStrategy, Network, Readout};
use crate::models::{GraphModel, Point};
use crate::rng::stream_rng;
use crate::sampler::{sample_graph, AlphaRule, EdgeMode, RandomGraph};

/// Training aborts once the loss exceeds this value.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub enum Architecture {
    Gnn(GnnSpec),
    Sgnn { inner: GnnSpec, outer: GnnSpec, strategy: IdentifierStrategy },
}

impl Architecture {
    pub fn init(&self, rng: &mut crate::rng::Rng) -> Result<Network> {
        Ok(match self {
            Architecture::Gnn(s) => Network::Gnn(GnnParams::init(s, rng)?),
            Architecture::Sgnn { inner, outer, strategy } => {
                if inner.output_dim() != outer.dims[0] {
                    return Err(Error::Config("inner output dimension differs from outer input dimension".into()));
                }
                let i = GnnParams::init(inner, rng)?;
                let o = GnnParams::init(outer, rng)?;
                Network::Sgnn { inner: i, outer: o, strategy: *strategy }
            }
        })
    }
}

/// What each node is trained to predict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetKind {
    /// The node's community (finite latent spaces).
    Community,
    /// `cos(freq·x)` of a real latent.
    Cos(f64),
    /// `sin(freq·x)` of a real latent.
    Sin(f64),
}

impl TargetKind {
    pub fn targets(&self, latents: &[Point]) -> Result<Targets> {
        match self {
            TargetKind::Community => latents
                .iter()
                .map(|p| match p {
                    Point::Class(k) => Ok(*k),
                    _ => Err(Error::Config("community targets need a finite latent space".into())),
                })
                .collect::<Result<Vec<_>>>()
                .map(Targets::Classes),
            TargetKind::Cos(_) | TargetKind::Sin(_) => {
                let mut y = Array2::zeros((latents.len(), 1));
                for (i, p) in latents.iter().enumerate() {
                    let x = match p {
                        Point::Real(x) => *x,
                        _ => return Err(Error::Config("function targets need an interval latent space".into())),
                    };
                    y[[i, 0]] = self.eval(x);
                }
                Ok(Targets::Values(y))
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TargetKind::Community => f64::NAN,
            TargetKind::Cos(f) => (f * x).cos(),
            TargetKind::Sin(f) => (f * x).sin(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TargetKind::Community => "community".into(),
            TargetKind::Cos(f) => format!("cos:{f}"),
            TargetKind::Sin(f) => format!("sin:{f}"),
        }
    }
}

impl std::str::FromStr for TargetKind {
    type Err = Error;
    /// `community`, `cos:5`, `sin:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad target '{s}'"));
        match s.split_once(':') {
            None if s == "community" => Ok(TargetKind::Community),
            Some(("cos", f)) => Ok(TargetKind::Cos(f.parse().map_err(|_| bad())?)),
            Some(("sin", f)) => Ok(TargetKind::Sin(f.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub model: GraphModel,
    pub arch: Architecture,
    pub loss: LossKind,
    pub target: TargetKind,
    pub epochs: usize,
    pub train_graphs: usize,
    pub train_n: usize,
    pub test_n: usize,
    pub mode: EdgeMode,
    pub alpha: AlphaRule,
    pub seed: u64,
    pub lr: f64,
    /// Test metric is computed every `eval_every` epochs and after the last one.
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.train_graphs == 0 || self.train_n == 0 || self.test_n == 0 || self.eval_every == 0 {
            return Err(Error::Config("epochs, graph counts, sizes and eval_every must be positive".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        match (self.loss, self.target) {
            (LossKind::CrossEntropy, TargetKind::Community) | (LossKind::Square, TargetKind::Cos(_) | TargetKind::Sin(_)) => Ok(()),
            _ => Err(Error::Config("loss kind does not match the target".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    /// Sum of the per-graph losses before the update of this epoch.
    pub loss: f64,
    pub test_metric: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub net: Network,
    pub history: Vec<HistoryRow>,
    pub test_graph: RandomGraph,
    /// Output of the trained network on the test graph.
    pub test_output: Array2<f64>,
    /// Accuracy for community targets, MSE otherwise.
    pub test_metric: f64,
    pub train_graphs: Vec<RandomGraph>,
}

fn metric(out: &Array2<f64>, targets: &Targets) -> f64 {
    match targets {
        Targets::Classes(c) => accuracy(out, c),
        Targets::Values(y) => {
            let r = out - y;
            r.mapv(|v| v * v).sum() / out.nrows() as f64
        }
    }
}

/// Full-batch training over a fixed set of sampled graphs.
pub fn train(config: &TrainConfig) -> Result<TrainOutput> {
    config.validate()?;
    let readout = Readout::Equivariant;
    let mut net = config.arch.init(&mut stream_rng(config.seed, &[0]))?;
    let sample = |n: usize, path: &[u64]| {
        sample_graph(&config.model, n, config.mode, config.alpha.alpha(n), &mut stream_rng(config.seed, path))
    };
    let graphs = (0..config.train_graphs).map(|g| sample(config.train_n, &[1, g as u64])).collect::<Result<Vec<_>>>()?;
    let targets = graphs.iter().map(|g| config.target.targets(&g.latents)).collect::<Result<Vec<_>>>()?;
    let test_graph = sample(config.test_n, &[2])?;
    let test_targets = config.target.targets(&test_graph.latents)?;

    let mut theta = net.to_vec();
    let mut adam = AdamState::new(theta.len(), config.lr);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let parts = graphs
            .par_iter()
            .zip(targets.par_iter())
            .map(|(g, t)| loss_and_grad(&net, &g.adjacency, None, t, config.loss, readout))
            .collect::<Vec<_>>();
        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for part in parts {
            let (l, g) = match part {
                Ok(v) => v,
                Err(Error::NonFinite { .. }) => {
                    return Err(Error::Diverged { epoch, loss: f64::NAN, history: history.iter().map(|h: &HistoryRow| h.loss).collect() })
                }
                Err(e) => return Err(e),
            };
            loss += l;
            for (acc, v) in grad.iter_mut().zip(g.to_vec()) {
                *acc += v;
            }
        }
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            return Err(Error::Diverged { epoch, loss, history: history.iter().map(|h| h.loss).collect() });
        }
        adam.update(&mut theta, &grad);
        net.set_from(&theta)?;
        let test_metric = if (epoch + 1) % config.eval_every == 0 || epoch + 1 == config.epochs {
            Some(metric(&net.discrete(&test_graph.adjacency, None, readout)?, &test_targets))
        } else {
            None
        };
        history.push(HistoryRow { epoch, loss, test_metric });
    }
    let test_output = net.discrete(&test_graph.adjacency, None, readout)?;
    let test_metric = metric(&test_output, &test_targets);
    Ok(TrainOutput { net, history, test_graph, test_output, test_metric, train_graphs: graphs })
}
