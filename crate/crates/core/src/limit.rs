//! Continuous limits: c-GNNs and c-SGNNs evaluated on the latent space with
//! the same parameters as their discrete counterparts, and the
//! discrete-versus-continuous convergence statistics.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use crate::error::{shape_err, Error, Result};
use crate::gnn::{run_gnn, run_sgnn, GnnParams, IdentifierStrategy, Network, Propagator, Readout, Signal};
use crate::models::{GraphModel, LatentSpace, Point};
use crate::sampler::RandomGraph;

/// How a [`LatentFunction`] is stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// One row per class.
    Finite,
    /// Values at quadrature nodes in increasing order; linear interpolation in between.
    Grid,
    /// Values at Monte-Carlo points; nearest-neighbour evaluation.
    Scattered,
}

/// A function `X → R^d` sampled at the integration nodes of a model.
#[derive(Clone, Debug)]
pub struct LatentFunction {
    pub repr: Representation,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// `nodes × d`.
    pub values: Array2<f64>,
}

/// A function `X × X → R` on the integration nodes: `values[[i, j]] = η(ξ_i, ξ_j)`.
#[derive(Clone, Debug)]
pub struct BivariateLatentFunction {
    pub repr: Representation,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub values: Array2<f64>,
}

fn representation(space: &LatentSpace) -> Representation {
    match space {
        LatentSpace::Finite { .. } => Representation::Finite,
        LatentSpace::Interval { .. } => Representation::Grid,
        LatentSpace::Sphere { .. } => Representation::Scattered,
    }
}

impl LatentFunction {
    /// Samples `f` at the model's integration nodes.
    pub fn from_fn(model: &GraphModel, d: usize, f: impl Fn(&Point) -> Vec<f64>) -> Result<Self> {
        let (nodes, weights) = model.dist.quadrature();
        let mut values = Array2::zeros((nodes.len(), d));
        for (i, x) in nodes.iter().enumerate() {
            let v = f(x);
            if v.len() != d {
                return shape_err(format!("function returned {} values, expected {d}", v.len()));
            }
            values.row_mut(i).assign(&Array1::from(v));
        }
        Ok(LatentFunction { repr: representation(&model.space), nodes, weights, values })
    }

    pub fn constant(model: &GraphModel, c: f64, d: usize) -> Self {
        Self::from_fn(model, d, |_| vec![c; d]).expect("constant has the right dimension")
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    fn with_values(&self, values: Array2<f64>) -> Self {
        LatentFunction { repr: self.repr, nodes: self.nodes.clone(), weights: self.weights.clone(), values }
    }

    /// `sup_x ‖f(x)‖₂` over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.rows().into_iter().map(|r| r.dot(&r).sqrt()).fold(0.0, f64::max)
    }

    /// `(∫ ‖f‖₂² dP)^{1/2}` with the integration weights.
    pub fn l2_norm(&self) -> f64 {
        self.values.rows().into_iter().zip(&self.weights).map(|(r, w)| w * r.dot(&r)).sum::<f64>().sqrt()
    }

    /// Evaluates at arbitrary latent points: table lookup, linear
    /// interpolation (constant beyond the outermost nodes) or nearest node.
    pub fn evaluate(&self, points: &[Point]) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((points.len(), self.dim()));
        for (i, p) in points.iter().enumerate() {
            let row = match (self.repr, p) {
                (Representation::Finite, Point::Class(c)) if *c < self.nodes.len() => self.values.row(*c).to_owned(),
                (Representation::Grid, Point::Real(t)) => self.interpolate(*t),
                (Representation::Scattered, Point::Sphere(v)) => {
                    let nearest = self
                        .nodes
                        .iter()
                        .enumerate()
                        .map(|(j, n)| match n {
                            Point::Sphere(u) => (j, u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()),
                            _ => (j, f64::INFINITY),
                        })
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(j, _)| j)
                        .unwrap_or(0);
                    self.values.row(nearest).to_owned()
                }
                _ => return Err(Error::Domain(format!("cannot evaluate a {:?} function at {p:?}", self.repr))),
            };
            out.row_mut(i).assign(&row);
        }
        Ok(out)
    }

    fn interpolate(&self, t: f64) -> Array1<f64> {
        let xs: Vec<f64> = self.nodes.iter().map(Point::coordinate).collect();
        let m = xs.len();
        if t <= xs[0] {
            return self.values.row(0).to_owned();
        }
        if t >= xs[m - 1] {
            return self.values.row(m - 1).to_owned();
        }
        let k = xs.partition_point(|&x| x <= t).clamp(1, m - 1);
        let (x0, x1) = (xs[k - 1], xs[k]);
        let s = if x1 > x0 { (t - x0) / (x1 - x0) } else { 0.0 };
        &self.values.row(k - 1) * (1.0 - s) + &self.values.row(k) * s
    }

    /// CSV with columns `x` (or `class`), `value_1..value_d`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let first = if self.repr == Representation::Finite { "class" } else { "x" };
        let cols: Vec<String> = (1..=self.dim()).map(|j| format!("value_{j}")).collect();
        writeln!(f, "{first},{}", cols.join(","))?;
        for (x, row) in self.nodes.iter().zip(self.values.rows()) {
            let vals: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(f, "{},{}", x.coordinate(), vals.join(","))?;
        }
        Ok(())
    }
}

/// Discretized `T_{W,P}`: `K_ij = W(ξ_i, ξ_j) ω_j` with readout weights `ω`.
pub fn model_propagator(model: &GraphModel) -> Result<(Propagator, Vec<Point>)> {
    let (nodes, weights) = model.dist.quadrature();
    let mut k = model.gram(&nodes);
    for mut row in k.axis_iter_mut(Axis(0)) {
        row.iter_mut().zip(&weights).for_each(|(v, w)| *v *= w);
    }
    Ok((Propagator::new(k, weights)?, nodes))
}

fn check_nodes(model: &GraphModel, f: &LatentFunction) -> Result<()> {
    let (nodes, _) = model.dist.quadrature();
    if nodes.len() != f.nodes.len() || f.values.nrows() != nodes.len() || nodes != f.nodes {
        return shape_err("latent function is not sampled on this model's integration nodes");
    }
    Ok(())
}

/// `(T f)(ξ_i) = Σ_j ω_j W(ξ_i, ξ_j) f(ξ_j)`.
pub fn t_operator_apply(model: &GraphModel, f: &LatentFunction) -> Result<LatentFunction> {
    check_nodes(model, f)?;
    let (prop, _) = model_propagator(model)?;
    Ok(f.with_values(prop.op.dot(&f.values)))
}

/// Output of a continuous network.
#[derive(Clone, Debug)]
pub enum LimitOutput {
    Function(LatentFunction),
    Vector(Array1<f64>),
}

impl LimitOutput {
    pub fn function(self) -> Option<LatentFunction> {
        match self {
            LimitOutput::Function(f) => Some(f),
            LimitOutput::Vector(_) => None,
        }
    }

    pub fn vector(self) -> Option<Array1<f64>> {
        match self {
            LimitOutput::Vector(v) => Some(v),
            LimitOutput::Function(_) => None,
        }
    }
}

fn wrap(out: Array2<f64>, readout: Readout, template: &LatentFunction) -> LimitOutput {
    match readout {
        Readout::Equivariant => LimitOutput::Function(template.with_values(out)),
        Readout::Invariant => LimitOutput::Vector(out.row(0).to_owned()),
    }
}

/// c-GNN: the layer recursion with `T_{W,P}` in place of `A/n`.
pub fn cgnn_forward(params: &GnnParams, model: &GraphModel, f0: &LatentFunction, readout: Readout) -> Result<LimitOutput> {
    check_nodes(model, f0)?;
    let (prop, _) = model_propagator(model)?;
    let (out, _) = run_gnn(params, &prop, &Signal::single(f0.values.clone()), readout, false)?;
    Ok(wrap(out, readout, f0))
}

/// `f^{(0)}, …, f^{(M)}` of a c-GNN.
pub fn cgnn_hidden_states(params: &GnnParams, model: &GraphModel, f0: &LatentFunction) -> Result<Vec<LatentFunction>> {
    check_nodes(model, f0)?;
    let (prop, _) = model_propagator(model)?;
    let (_, cache) = run_gnn(params, &prop, &Signal::single(f0.values.clone()), Readout::Equivariant, true)?;
    let cache = cache.expect("cache requested");
    let mut states: Vec<LatentFunction> = cache.layers.iter().map(|l| f0.with_values(l.powers[0].clone())).collect();
    match cache.layers.last() {
        Some(last) => {
            let act = params.activation;
            states.push(f0.with_values(last.pre.mapv(|v| act.eval(v))));
        }
        None => states.push(f0.clone()),
    }
    Ok(states)
}

/// `η_{W,P}` for an identifier strategy: `0`, `W`, or `T_{W,P}[W(·, y)]`.
pub fn eta_function(model: &GraphModel, strategy: IdentifierStrategy) -> Result<BivariateLatentFunction> {
    let (prop, nodes) = model_propagator(model)?;
    let m = nodes.len();
    let values = match strategy {
        IdentifierStrategy::OneHot => Array2::zeros((m, m)),
        IdentifierStrategy::OneHop => model.gram(&nodes),
        IdentifierStrategy::TwoHop => prop.op.dot(&model.gram(&nodes)),
    };
    Ok(BivariateLatentFunction { repr: representation(&model.space), nodes, weights: prop.weights, values })
}

/// c-SGNN `Ψ = Φ'(∫ Φ(η(·, y)) dP(y))` for a given bivariate input.
pub fn csgnn_forward_with_eta(
    inner: &GnnParams,
    outer: &GnnParams,
    model: &GraphModel,
    eta: &BivariateLatentFunction,
    readout: Readout,
) -> Result<LimitOutput> {
    let (prop, nodes) = model_propagator(model)?;
    let m = nodes.len();
    if eta.values.dim() != (m, m) || eta.nodes != nodes {
        return shape_err("bivariate input is not sampled on this model's integration nodes");
    }
    let ids = Signal { data: eta.values.as_standard_layout().into_owned().into_shape_with_order((m * m, 1)).unwrap(), batch: m };
    let (out, _) = run_sgnn(inner, outer, &prop, &ids, &prop.weights, readout, false)?;
    let template = LatentFunction { repr: eta.repr, nodes, weights: prop.weights.clone(), values: Array2::zeros((m, 0)) };
    Ok(wrap(out, readout, &template))
}

pub fn csgnn_forward(
    inner: &GnnParams,
    outer: &GnnParams,
    model: &GraphModel,
    strategy: IdentifierStrategy,
    readout: Readout,
) -> Result<LimitOutput> {
    let eta = eta_function(model, strategy)?;
    csgnn_forward_with_eta(inner, outer, model, &eta, readout)
}

/// `MSE_X(Z, f) = ((1/n) Σ_i ‖Z_i − f(x_i)‖²)^{1/2}`.
pub fn mse_x(z: &Array2<f64>, f: &LatentFunction, latents: &[Point]) -> Result<f64> {
    if z.nrows() != latents.len() || z.ncols() != f.dim() {
        return shape_err(format!("signal {:?} vs {} latents of a {}-dimensional function", z.dim(), latents.len(), f.dim()));
    }
    let fx = f.evaluate(latents)?;
    Ok(rms_rows(z, &fx))
}

/// Root mean over rows of squared row distances.
pub fn rms_rows(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows().max(1) as f64;
    ((a - b).mapv(|v| v * v).sum() / n).sqrt()
}

/// Continuous output of a network; constant input `1` for a GNN.
pub fn network_limit(net: &Network, model: &GraphModel, readout: Readout) -> Result<LimitOutput> {
    match net {
        Network::Gnn(p) => cgnn_forward(p, model, &LatentFunction::constant(model, 1.0, p.input_dim), readout),
        Network::Sgnn { inner, outer, strategy } => csgnn_forward(inner, outer, model, *strategy, readout),
    }
}

/// Distance between a discrete output and a continuous one: `MSE_X` for
/// equivariant outputs, Euclidean distance for invariant ones.
pub fn output_distance(discrete: &Array2<f64>, limit: &LimitOutput, latents: &[Point]) -> Result<f64> {
    match limit {
        LimitOutput::Function(f) => mse_x(discrete, f, latents),
        LimitOutput::Vector(v) => {
            if discrete.nrows() != 1 || discrete.ncols() != v.len() {
                return shape_err("invariant outputs differ in dimension");
            }
            Ok((&discrete.row(0) - v).mapv(|x| x * x).sum().sqrt())
        }
    }
}

/// Convergence statistic of a network on a sampled graph against its limit.
pub fn convergence_stat(net: &Network, g: &RandomGraph, model: &GraphModel, readout: Readout) -> Result<f64> {
    for x in &g.latents {
        if !model.space.contains(x) {
            return Err(Error::Domain("graph latents do not belong to the model's space".into()));
        }
    }
    let limit = network_limit(net, model, readout)?;
    output_distance(&net.discrete(&g.adjacency, None, readout)?, &limit, &g.latents)
}
