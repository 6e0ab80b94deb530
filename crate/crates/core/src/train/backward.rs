//! Reverse-mode differentiation through the layer recursion, the head,
//! invariant readouts and SGNN pooling.

use ndarray::{Array1, Array2, Axis};

use crate::error::{shape_err, Result};
use crate::gnn::{GnnCache, GnnParams, Head, Propagator, Readout, SgnnCache};

fn head_backward(params: &GnnParams, cache: &GnnCache, d_out: Array2<f64>, grad: &mut GnnParams) -> Array2<f64> {
    match (&params.head, &mut grad.head) {
        (Head::Square, _) => 2.0 * &cache.head.inputs[0] * &d_out,
        (Head::Mlp(layers), Head::Mlp(g)) => {
            let mut d = d_out;
            for i in (0..layers.len()).rev() {
                if i + 1 < layers.len() {
                    let act = params.activation;
                    d.zip_mut_with(&cache.head.pre[i], |v, &p| *v *= act.derivative(p));
                }
                g[i].w += &d.t().dot(&cache.head.inputs[i]);
                g[i].b += &d.sum_axis(Axis(0));
                d = d.dot(&layers[i].w);
            }
            d
        }
        _ => unreachable!("gradient shares the parameter layout"),
    }
}

/// Accumulates `∂L/∂θ` into `grad` and returns `∂L/∂Z^{(0)}`, given
/// `d_out = ∂L/∂output` for a forward pass that produced `cache`.
pub fn gnn_backward(
    params: &GnnParams,
    prop: &Propagator,
    cache: &GnnCache,
    d_out: Array2<f64>,
    grad: &mut GnnParams,
) -> Result<Array2<f64>> {
    let b = cache.batch;
    let n = prop.nodes();
    let d_hidden = head_backward(params, cache, d_out, grad);
    let mut dz = match cache.readout {
        Readout::Equivariant => d_hidden,
        Readout::Invariant => {
            if d_hidden.nrows() != b {
                return shape_err("invariant gradient has the wrong batch size");
            }
            let d = d_hidden.ncols();
            let mut dz = Array2::zeros((n * b, d));
            for i in 0..n {
                let w = prop.weights[i];
                for bb in 0..b {
                    dz.row_mut(i * b + bb).scaled_add(w, &d_hidden.row(bb));
                }
            }
            dz
        }
    };
    for (l, layer) in params.layers.iter().enumerate().rev() {
        let lc = &cache.layers[l];
        let act = params.activation;
        dz.zip_mut_with(&lc.pre, |v, &p| *v *= act.derivative(p));
        let g = &mut grad.layers[l];
        g.bias += &dz.sum_axis(Axis(0));
        let taps = layer.filters.len();
        for k in 0..taps {
            g.filters[k] += &dz.t().dot(&lc.powers[k]);
        }
        let mut acc = dz.dot(&layer.filters[taps - 1]);
        for k in (0..taps - 1).rev() {
            acc = prop.apply_transpose(&acc, b);
            acc += &dz.dot(&layer.filters[k]);
        }
        dz = acc;
    }
    Ok(dz)
}

/// Gradients of an SGNN; returns `(inner, outer)` gradient accumulations.
pub fn sgnn_backward(
    inner: &GnnParams,
    outer: &GnnParams,
    prop: &Propagator,
    cache: &SgnnCache,
    d_out: Array2<f64>,
    grad_inner: &mut GnnParams,
    grad_outer: &mut GnnParams,
) -> Result<()> {
    let d_pooled = gnn_backward(outer, prop, &cache.outer, d_out, grad_outer)?;
    let q = cache.pool_weights.len();
    let (n, d) = d_pooled.dim();
    let mut d_inner = Array2::zeros((n * q, d));
    for i in 0..n {
        let row = d_pooled.row(i);
        for (k, &w) in cache.pool_weights.iter().enumerate() {
            d_inner.row_mut(i * q + k).scaled_add(w, &row);
        }
    }
    gnn_backward(inner, prop, &cache.inner, d_inner, grad_inner)?;
    Ok(())
}

/// Column sums, exposed for closed-form gradient checks.
pub fn column_sums(m: &Array2<f64>) -> Array1<f64> {
    m.sum_axis(Axis(0))
}
