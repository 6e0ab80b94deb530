//! Spectral GNN parameters and forward passes shared by graphs and their
//! continuous limits.
//!
//! A layer maps `Z ↦ ρ(Σ_k S^k Z B_kᵀ + 1 bᵀ)` where `S` is the propagation
//! operator: `A/n` on a graph, the discretized integral operator on a model.

mod forward;
mod identifiers;
mod io;

pub use forward::{
    apply_head, gnn_forward_equivariant, pooled_identifiers, gnn_forward_invariant, run_gnn, run_sgnn, sgnn_forward, sgnn_forward_subsampled,
    GnnCache, HeadCache, LayerCache, Propagator, Readout, SgnnCache, Signal,
};
pub use identifiers::{identifier_batch, identifier_chunk, identifier_signal, IdentifierStrategy};
pub use io::{read_params, write_params};

use ndarray::{Array1, Array2};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Pointwise activation with `ρ(0) = 0` and Lipschitz constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative; the ReLU subgradient at 0 is 0.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - x.tanh().powi(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
        }
    }

    /// Looks up an activation by name and checks `ρ(0) = 0`.
    pub fn from_name(s: &str) -> Result<Self> {
        let a = match s {
            "relu" => Activation::Relu,
            "identity" => Activation::Identity,
            "tanh" => Activation::Tanh,
            _ => return Err(Error::Config(format!("unknown activation '{s}'"))),
        };
        if a.eval(0.0) != 0.0 {
            return Err(Error::Config(format!("activation '{s}' does not vanish at 0")));
        }
        Ok(a)
    }
}

/// `x ↦ W x + b` with `W` of shape `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Affine {
    pub fn zeros(input: usize, output: usize) -> Self {
        Affine { w: Array2::zeros((output, input)), b: Array1::zeros(output) }
    }
}

/// Row-wise readout `g`.
#[derive(Clone, Debug, PartialEq)]
pub enum Head {
    /// Affine maps with the network activation between them; empty is the identity.
    Mlp(Vec<Affine>),
    /// Exact entrywise square `t ↦ t²`, a test hook standing in for an MLP approximating it.
    Square,
}

impl Head {
    pub fn output_dim(&self, input: usize) -> usize {
        match self {
            Head::Mlp(layers) => layers.last().map_or(input, |l| l.w.nrows()),
            Head::Square => input,
        }
    }
}

/// One propagation layer: filter coefficients `B_0..B_K` (each `d_out × d_in`) and a bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub filters: Vec<Array2<f64>>,
    pub bias: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnnParams {
    pub activation: Activation,
    pub layers: Vec<Layer>,
    pub head: Head,
    /// `d_0`; the remaining widths are read off the layers.
    pub input_dim: usize,
}

/// Architecture of a GNN, used to allocate and initialize parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GnnSpec {
    /// `d_0, …, d_M`.
    pub dims: Vec<usize>,
    /// Maximal filter order `K`.
    pub order: usize,
    /// Widths of the head after `d_M`; empty means identity.
    pub head: Vec<usize>,
    pub square_head: bool,
    pub activation: Activation,
}

impl GnnSpec {
    pub fn new(dims: &[usize], order: usize, head: &[usize]) -> Self {
        GnnSpec { dims: dims.to_vec(), order, head: head.to_vec(), square_head: false, activation: Activation::Relu }
    }

    pub fn with_activation(mut self, a: Activation) -> Self {
        self.activation = a;
        self
    }

    pub fn with_square_head(mut self) -> Self {
        self.square_head = true;
        self.head.clear();
        self
    }

    pub fn output_dim(&self) -> usize {
        self.head.last().copied().unwrap_or(*self.dims.last().unwrap())
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().chain(&self.head).any(|&d| d == 0) {
            return Err(Error::Config(format!("invalid GNN dimensions {:?} / head {:?}", self.dims, self.head)));
        }
        Ok(())
    }
}

impl GnnParams {
    /// All-zero parameters with the shapes of `spec`.
    pub fn zeros(spec: &GnnSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .dims
            .windows(2)
            .map(|w| Layer { filters: vec![Array2::zeros((w[1], w[0])); spec.order + 1], bias: Array1::zeros(w[1]) })
            .collect();
        let head = if spec.square_head {
            Head::Square
        } else {
            let mut prev = *spec.dims.last().unwrap();
            Head::Mlp(
                spec.head
                    .iter()
                    .map(|&d| {
                        let a = Affine::zeros(prev, d);
                        prev = d;
                        a
                    })
                    .collect(),
            )
        };
        Ok(GnnParams { activation: spec.activation, layers, head, input_dim: spec.dims[0] })
    }

    /// Coefficients and head weights uniform in `±1/√fan_in`, biases zero.
    pub fn init(spec: &GnnSpec, rng: &mut Rng) -> Result<Self> {
        let mut p = Self::zeros(spec)?;
        for layer in &mut p.layers {
            let bound = 1.0 / (layer.filters[0].ncols() as f64).sqrt();
            for f in &mut layer.filters {
                f.mapv_inplace(|_| rng.gen_range(-bound..=bound));
            }
        }
        if let Head::Mlp(h) = &mut p.head {
            for a in h {
                let bound = 1.0 / (a.w.ncols() as f64).sqrt();
                a.w.mapv_inplace(|_| rng.gen_range(-bound..=bound));
            }
        }
        Ok(p)
    }

    /// Like [`init`](Self::init) but with biases also uniform in `±bias_scale`.
    pub fn random(spec: &GnnSpec, bias_scale: f64, rng: &mut Rng) -> Result<Self> {
        let mut p = Self::init(spec, rng)?;
        if bias_scale > 0.0 {
            for layer in &mut p.layers {
                layer.bias.mapv_inplace(|_| rng.gen_range(-bias_scale..=bias_scale));
            }
            if let Head::Mlp(h) = &mut p.head {
                for a in h {
                    a.b.mapv_inplace(|_| rng.gen_range(-bias_scale..=bias_scale));
                }
            }
        }
        Ok(p)
    }

    /// Number of propagation layers `M`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn order(&self) -> usize {
        self.layers.first().map_or(0, |l| l.filters.len() - 1)
    }

    /// `d_0, …, d_M`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim).chain(self.layers.iter().map(|l| l.bias.len())).collect()
    }

    pub fn hidden_output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, |l| l.bias.len())
    }

    pub fn output_dim(&self) -> usize {
        self.head.output_dim(self.hidden_output_dim())
    }

    /// Checks that all shapes chain.
    pub fn validate(&self) -> Result<()> {
        let mut d = self.input_dim;
        if d == 0 {
            return Err(Error::Shape("input dimension must be positive".into()));
        }
        let order = self.order();
        for (l, layer) in self.layers.iter().enumerate() {
            let out = layer.bias.len();
            if layer.filters.len() != order + 1 {
                return Err(Error::Shape(format!("layer {l} has {} filter taps, expected {}", layer.filters.len(), order + 1)));
            }
            if out == 0 || layer.filters.iter().any(|f| f.dim() != (out, d)) {
                return Err(Error::Shape(format!("layer {l} filters do not map {d} -> {out}")));
            }
            d = out;
        }
        if let Head::Mlp(h) = &self.head {
            for (i, a) in h.iter().enumerate() {
                if a.w.ncols() != d || a.b.len() != a.w.nrows() {
                    return Err(Error::Shape(format!("head layer {i} expects input {d}, got {:?}", a.w.dim())));
                }
                d = a.w.nrows();
            }
        }
        Ok(())
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        let mut n = 0;
        for l in &self.layers {
            n += l.filters.iter().map(|f| f.len()).sum::<usize>() + l.bias.len();
        }
        if let Head::Mlp(h) = &self.head {
            n += h.iter().map(|a| a.w.len() + a.b.len()).sum::<usize>();
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters in a fixed order: per layer the filters then the bias, then the head.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for l in &self.layers {
            for f in &l.filters {
                out.extend(f.iter());
            }
            out.extend(l.bias.iter());
        }
        if let Head::Mlp(h) = &self.head {
            for a in h {
                out.extend(a.w.iter());
                out.extend(a.b.iter());
            }
        }
        out
    }

    /// Inverse of [`to_vec`](Self::to_vec).
    pub fn set_from(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.len(), values.len())));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            for f in &mut l.filters {
                f.iter_mut().for_each(|v| *v = it.next().unwrap());
            }
            l.bias.iter_mut().for_each(|v| *v = it.next().unwrap());
        }
        if let Head::Mlp(h) = &mut self.head {
            for a in h {
                a.w.iter_mut().for_each(|v| *v = it.next().unwrap());
                a.b.iter_mut().for_each(|v| *v = it.next().unwrap());
            }
        }
        Ok(())
    }

    /// Same shapes, every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.set_from(&vec![0.0; self.len()]).unwrap();
        z
    }

    /// Multiplies every filter coefficient by `c`.
    pub fn scale_filters(&mut self, c: f64) {
        for l in &mut self.layers {
            for f in &mut l.filters {
                f.mapv_inplace(|v| v * c);
            }
        }
    }
}

/// A GNN, or an SGNN with its identifier strategy.
#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Gnn(GnnParams),
    Sgnn { inner: GnnParams, outer: GnnParams, strategy: IdentifierStrategy },
}

impl Network {
    /// Output on a graph. A GNN receives `input`, or the constant signal `1` when `None`.
    pub fn discrete(&self, a: &Array2<f64>, input: Option<&Array2<f64>>, readout: Readout) -> Result<Array2<f64>> {
        let prop = Propagator::from_adjacency(a)?;
        let n = a.nrows();
        match self {
            Network::Gnn(p) => {
                let z0 = input.cloned().unwrap_or_else(|| Array2::ones((n, p.input_dim)));
                Ok(run_gnn(p, &prop, &Signal::single(z0), readout, false)?.0)
            }
            Network::Sgnn { inner, outer, strategy } => sgnn_forward(inner, outer, *strategy, a, readout),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Network::Gnn(p) => p.output_dim(),
            Network::Sgnn { outer, .. } => outer.output_dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Network::Gnn(p) => p.len(),
            Network::Sgnn { inner, outer, .. } => inner.len() + outer.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inner parameters first for an SGNN.
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Network::Gnn(p) => p.to_vec(),
            Network::Sgnn { inner, outer, .. } => {
                let mut v = inner.to_vec();
                v.extend(outer.to_vec());
                v
            }
        }
    }

    pub fn set_from(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.len(), values.len())));
        }
        match self {
            Network::Gnn(p) => p.set_from(values),
            Network::Sgnn { inner, outer, .. } => {
                let k = inner.len();
                inner.set_from(&values[..k])?;
                outer.set_from(&values[k..])
            }
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.set_from(&vec![0.0; self.len()]).unwrap();
        z
    }
}
