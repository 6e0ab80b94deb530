use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{identifier_batch, identifier_chunk, Activation, GnnParams, Head, IdentifierStrategy};
use crate::error::{shape_err, Error, Result};

/// Propagation operator `S` and the integration weights used for readouts.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub op: Array2<f64>,
    pub weights: Vec<f64>,
}

impl Propagator {
    pub fn new(op: Array2<f64>, weights: Vec<f64>) -> Result<Self> {
        if op.nrows() != op.ncols() || op.nrows() != weights.len() {
            return shape_err(format!("operator {:?} does not match {} weights", op.dim(), weights.len()));
        }
        Ok(Propagator { op, weights })
    }

    /// `S = A/n` with uniform weights `1/n`.
    pub fn from_adjacency(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() || n == 0 {
            return shape_err(format!("adjacency must be square and nonempty, got {:?}", a.dim()));
        }
        Self::new(a / n as f64, vec![1.0 / n as f64; n])
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    /// `S X` for a batched signal laid out as `(node·batch, d)`.
    pub fn apply(&self, x: &Array2<f64>, batch: usize) -> Array2<f64> {
        propagate(self.op.view(), x, batch)
    }

    /// `Sᵀ X`.
    pub fn apply_transpose(&self, x: &Array2<f64>, batch: usize) -> Array2<f64> {
        propagate(self.op.t(), x, batch)
    }

    /// `Σ_i w_i X_{i,b,:}` for every batch entry `b`; returns `(batch, d)`.
    pub fn integrate(&self, x: &Array2<f64>, batch: usize) -> Array2<f64> {
        let (n, d) = (self.nodes(), x.ncols());
        let flat = x.as_standard_layout();
        let wide = flat.view().into_shape_with_order((n, batch * d)).expect("contiguous signal");
        let w = ArrayView2::from_shape((1, n), &self.weights).unwrap();
        w.dot(&wide).into_shape_with_order((batch, d)).expect("contiguous result")
    }
}

fn propagate(op: ArrayView2<f64>, x: &Array2<f64>, batch: usize) -> Array2<f64> {
    let (n, d) = (op.nrows(), x.ncols());
    let flat = x.as_standard_layout();
    let wide = flat.view().into_shape_with_order((n, batch * d)).expect("contiguous signal");
    op.dot(&wide).into_shape_with_order((n * batch, d)).expect("contiguous result")
}

/// A batch of `batch` graph signals on the same nodes; row `i·batch + b`
/// holds node `i` of signal `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub data: Array2<f64>,
    pub batch: usize,
}

impl Signal {
    pub fn single(z: Array2<f64>) -> Self {
        Signal { data: z, batch: 1 }
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Readout {
    Equivariant,
    Invariant,
}

/// Intermediate values of one layer: `S^k Z` for every tap and the pre-activation.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub powers: Vec<Array2<f64>>,
    pub pre: Array2<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct HeadCache {
    /// Input of each affine map (or of the square).
    pub inputs: Vec<Array2<f64>>,
    pub pre: Vec<Array2<f64>>,
}

#[derive(Clone, Debug)]
pub struct GnnCache {
    pub layers: Vec<LayerCache>,
    pub head: HeadCache,
    pub readout: Readout,
    pub batch: usize,
}

/// Applies `g` row-wise.
pub fn apply_head(head: &Head, act: Activation, x: Array2<f64>, cache: Option<&mut HeadCache>) -> Array2<f64> {
    let mut local = HeadCache::default();
    let c = cache.unwrap_or(&mut local);
    match head {
        Head::Square => {
            let out = x.mapv(|t| t * t);
            c.inputs.push(x);
            out
        }
        Head::Mlp(layers) => {
            let mut x = x;
            for (i, a) in layers.iter().enumerate() {
                let pre = x.dot(&a.w.t()) + &a.b;
                c.inputs.push(x);
                x = if i + 1 < layers.len() { pre.mapv(|v| act.eval(v)) } else { pre.clone() };
                c.pre.push(pre);
            }
            x
        }
    }
}

fn check_finite(x: &Array2<f64>, layer: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { layer })
    }
}

/// Runs the layer stack and the head. Equivariant output has shape
/// `(node·batch, d_out)`, invariant output `(batch, d_out)`.
pub fn run_gnn(
    params: &GnnParams,
    prop: &Propagator,
    z0: &Signal,
    readout: Readout,
    keep_cache: bool,
) -> Result<(Array2<f64>, Option<GnnCache>)> {
    let n = prop.nodes();
    let b = z0.batch;
    if z0.data.nrows() != n * b {
        return shape_err(format!("signal has {} rows, expected {} nodes x {} batch", z0.data.nrows(), n, b));
    }
    if z0.dim() != params.input_dim {
        return shape_err(format!("signal has {} columns, network expects {}", z0.dim(), params.input_dim));
    }
    let mut caches = Vec::with_capacity(params.depth());
    let mut z = z0.data.clone();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut powers = Vec::with_capacity(layer.filters.len());
        let mut pre = z.dot(&layer.filters[0].t());
        let mut p = z;
        for bk in &layer.filters[1..] {
            let next = prop.apply(&p, b);
            powers.push(p);
            pre += &next.dot(&bk.t());
            p = next;
        }
        powers.push(p);
        pre += &layer.bias;
        let act = params.activation;
        z = pre.mapv(|v| act.eval(v));
        check_finite(&z, l)?;
        if keep_cache {
            caches.push(LayerCache { powers, pre });
        }
    }
    let pooled = match readout {
        Readout::Equivariant => z,
        Readout::Invariant => prop.integrate(&z, b),
    };
    let mut head = HeadCache::default();
    let out = apply_head(&params.head, params.activation, pooled, keep_cache.then_some(&mut head));
    check_finite(&out, params.depth())?;
    Ok((out, keep_cache.then_some(GnnCache { layers: caches, head, readout, batch: b })))
}

/// `Φ_A(Z) = g(Z^{(M)})` on the graph with adjacency `a`.
pub fn gnn_forward_equivariant(params: &GnnParams, a: &Array2<f64>, z0: &Array2<f64>) -> Result<Array2<f64>> {
    let prop = Propagator::from_adjacency(a)?;
    Ok(run_gnn(params, &prop, &Signal::single(z0.clone()), Readout::Equivariant, false)?.0)
}

/// `Φ̄_A(Z) = g((1/n) Σ_i Z^{(M)}_i)`.
pub fn gnn_forward_invariant(params: &GnnParams, a: &Array2<f64>, z0: &Array2<f64>) -> Result<Array1<f64>> {
    let prop = Propagator::from_adjacency(a)?;
    let out = run_gnn(params, &prop, &Signal::single(z0.clone()), Readout::Invariant, false)?.0;
    Ok(out.row(0).to_owned())
}

#[derive(Clone, Debug)]
pub struct SgnnCache {
    pub inner: GnnCache,
    pub outer: GnnCache,
    pub pool_weights: Vec<f64>,
}

/// `Σ_q w_q X_{i,q,:}` for every node `i`; `x` is `(node·Q, d)`.
fn pool(x: &Array2<f64>, weights: &[f64]) -> Array2<f64> {
    let q = weights.len();
    let n = x.nrows() / q;
    let mut out = Array2::zeros((n, x.ncols()));
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        for (k, &w) in weights.iter().enumerate() {
            row.scaled_add(w, &x.row(i * q + k));
        }
    }
    out
}

/// Inner equivariant network on every identifier signal, weighted pooling
/// over identifiers, then the outer network.
pub fn run_sgnn(
    inner: &GnnParams,
    outer: &GnnParams,
    prop: &Propagator,
    identifiers: &Signal,
    pool_weights: &[f64],
    readout: Readout,
    keep_cache: bool,
) -> Result<(Array2<f64>, Option<SgnnCache>)> {
    if inner.output_dim() != outer.input_dim {
        return shape_err(format!(
            "inner network outputs {} features but the outer network expects {}",
            inner.output_dim(),
            outer.input_dim
        ));
    }
    if identifiers.batch != pool_weights.len() {
        return shape_err(format!("{} identifier signals but {} pooling weights", identifiers.batch, pool_weights.len()));
    }
    let (h, inner_cache) = run_gnn(inner, prop, identifiers, Readout::Equivariant, keep_cache)?;
    let pooled = pool(&h, pool_weights);
    let (out, outer_cache) = run_gnn(outer, prop, &Signal::single(pooled), readout, keep_cache)?;
    let cache = match (inner_cache, outer_cache) {
        (Some(inner), Some(outer)) => Some(SgnnCache { inner, outer, pool_weights: pool_weights.to_vec() }),
        _ => None,
    };
    Ok((out, cache))
}

/// Entries per intermediate array allowed when streaming identifiers in chunks.
pub const CHUNK_ENTRIES: usize = 1 << 22;

/// `(1/n) Σ_q Φ_A(E_q(A))` computed over chunks of identifiers so that memory
/// stays `O(n · chunk · width)` instead of `O(n² · width)`.
pub fn pooled_identifiers(inner: &GnnParams, prop: &Propagator, strategy: IdentifierStrategy, a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let width = inner.dims().into_iter().chain([inner.output_dim()]).max().unwrap_or(1).max(1);
    let chunk = (CHUNK_ENTRIES / (n * width)).clamp(1, n);
    let w = 1.0 / n as f64;
    let mut pooled = Array2::zeros((n, inner.output_dim()));
    let mut q0 = 0;
    while q0 < n {
        let q1 = (q0 + chunk).min(n);
        let ids = identifier_chunk(strategy, a, q0..q1)?;
        let (h, _) = run_gnn(inner, prop, &ids, Readout::Equivariant, false)?;
        let b = q1 - q0;
        for (i, mut row) in pooled.axis_iter_mut(Axis(0)).enumerate() {
            for k in 0..b {
                row.scaled_add(w, &h.row(i * b + k));
            }
        }
        q0 = q1;
    }
    Ok(pooled)
}

/// `Ψ_A = Φ'_A((1/n) Σ_q Φ_A(E_q(A)))`. Equivariant output is `n × d_out`, invariant `1 × d_out`.
pub fn sgnn_forward(
    inner: &GnnParams,
    outer: &GnnParams,
    strategy: IdentifierStrategy,
    a: &Array2<f64>,
    readout: Readout,
) -> Result<Array2<f64>> {
    let prop = Propagator::from_adjacency(a)?;
    if inner.output_dim() != outer.input_dim {
        return shape_err(format!(
            "inner network outputs {} features but the outer network expects {}",
            inner.output_dim(),
            outer.input_dim
        ));
    }
    let pooled = pooled_identifiers(inner, &prop, strategy, a)?;
    Ok(run_gnn(outer, &prop, &Signal::single(pooled), readout, false)?.0)
}

/// SGNN pooled over a subset of identifiers only, with weights `1/|qs|`.
///
/// This estimates the full average without bias only in expectation over a
/// uniform choice of `qs`; a single draw adds `O(|qs|^{-1/2})` noise that the
/// nonlinear outer network turns into a bias.
pub fn sgnn_forward_subsampled(
    inner: &GnnParams,
    outer: &GnnParams,
    strategy: IdentifierStrategy,
    a: &Array2<f64>,
    qs: &[usize],
    readout: Readout,
) -> Result<Array2<f64>> {
    let prop = Propagator::from_adjacency(a)?;
    let n = a.nrows();
    if qs.is_empty() || qs.iter().any(|&q| q >= n) {
        return Err(Error::Domain(format!("identifier subset must be nonempty with indices < {n}")));
    }
    let full = identifier_batch(strategy, a)?;
    let mut data = Array2::zeros((n * qs.len(), 1));
    for i in 0..n {
        for (k, &q) in qs.iter().enumerate() {
            data[[i * qs.len() + k, 0]] = full.data[[i * n + q, 0]];
        }
    }
    let ids = Signal { data, batch: qs.len() };
    Ok(run_sgnn(inner, outer, &prop, &ids, &vec![1.0 / qs.len() as f64; qs.len()], readout, false)?.0)
}
