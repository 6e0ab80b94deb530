//! Gradients of the (S)GNN family, losses, Adam and the training loop.

mod adam;
mod backward;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use backward::{column_sums, gnn_backward, sgnn_backward};
pub use loss::{accuracy, log_softmax, loss_and_output_grad, LossKind, Targets};
pub use trainer::{
    train, Architecture, HistoryRow, TargetKind, TrainConfig, TrainOutput, DIVERGENCE_LOSS,
};

use ndarray::Array2;
use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::gnn::{identifier_batch, run_gnn, run_sgnn, Network, Propagator, Readout, Signal};
use crate::rng::Rng;

/// Loss of `net` on the graph `a` and its gradient, laid out like `net`.
pub fn loss_and_grad(
    net: &Network,
    a: &Array2<f64>,
    input: Option<&Array2<f64>>,
    targets: &Targets,
    loss: LossKind,
    readout: Readout,
) -> Result<(f64, Network)> {
    let (value, grad, _) = loss_grad_input(net, a, input, targets, loss, readout)?;
    Ok((value, grad))
}

/// Like [`loss_and_grad`], also returning `∂loss/∂Z^{(0)}` for a GNN.
pub fn loss_grad_input(
    net: &Network,
    a: &Array2<f64>,
    input: Option<&Array2<f64>>,
    targets: &Targets,
    loss: LossKind,
    readout: Readout,
) -> Result<(f64, Network, Option<Array2<f64>>)> {
    let prop = Propagator::from_adjacency(a)?;
    let n = a.nrows();
    let mut grad = net.zeros_like();
    match (net, &mut grad) {
        (Network::Gnn(p), Network::Gnn(g)) => {
            let z0 = input.cloned().unwrap_or_else(|| Array2::ones((n, p.input_dim)));
            let (out, cache) = run_gnn(p, &prop, &Signal::single(z0), readout, true)?;
            let (value, d_out) = finite_loss(&out, targets, loss, p.depth())?;
            let dz0 = backward::gnn_backward(p, &prop, &cache.expect("cache requested"), d_out, g)?;
            Ok((value, grad, Some(dz0)))
        }
        (Network::Sgnn { inner, outer, strategy }, Network::Sgnn { inner: gi, outer: go, .. }) => {
            let ids = identifier_batch(*strategy, a)?;
            let pw = vec![1.0 / n as f64; n];
            let (out, cache) = run_sgnn(inner, outer, &prop, &ids, &pw, readout, true)?;
            let (value, d_out) = finite_loss(&out, targets, loss, inner.depth() + outer.depth())?;
            backward::sgnn_backward(inner, outer, &prop, &cache.expect("cache requested"), d_out, gi, go)?;
            Ok((value, grad, None))
        }
        _ => unreachable!("zeros_like keeps the variant"),
    }
}

fn finite_loss(out: &Array2<f64>, targets: &Targets, loss: LossKind, layer: usize) -> Result<(f64, Array2<f64>)> {
    let (v, g) = loss_and_output_grad(out, targets, loss)?;
    if !v.is_finite() {
        return Err(Error::NonFinite { layer });
    }
    Ok((v, g))
}

/// Loss only.
pub fn loss_value(
    net: &Network,
    a: &Array2<f64>,
    input: Option<&Array2<f64>>,
    targets: &Targets,
    loss: LossKind,
    readout: Readout,
) -> Result<f64> {
    Ok(loss_and_output_grad(&net.discrete(a, input, readout)?, targets, loss)?.0)
}

/// Problem instance shared by the gradient checks.
#[derive(Clone, Copy, Debug)]
pub struct GradProblem<'a> {
    pub a: &'a Array2<f64>,
    pub input: Option<&'a Array2<f64>>,
    pub targets: &'a Targets,
    pub loss: LossKind,
    pub readout: Readout,
}

/// Coordinates probed by the gradient checks.
pub const GRAD_CHECK_COORDS: usize = 100;

/// Worst relative error `|g − fd| / max(|g|, |fd|, 1e-6)` between `grad`
/// and central differences with step `step`, over a random subset of at most
/// [`GRAD_CHECK_COORDS`] coordinates.
pub fn finite_difference_error(net: &Network, problem: &GradProblem, grad: &[f64], step: f64, rng: &mut Rng) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {step}")));
    }
    let theta = net.to_vec();
    if grad.len() != theta.len() {
        return Err(Error::Shape(format!("{} gradient entries for {} parameters", grad.len(), theta.len())));
    }
    let coords = sample(rng, theta.len(), GRAD_CHECK_COORDS.min(theta.len())).into_vec();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for j in coords {
        let mut t = theta.clone();
        t[j] = theta[j] + step;
        probe.set_from(&t)?;
        let up = loss_value(&probe, problem.a, problem.input, problem.targets, problem.loss, problem.readout)?;
        t[j] = theta[j] - step;
        probe.set_from(&t)?;
        let down = loss_value(&probe, problem.a, problem.input, problem.targets, problem.loss, problem.readout)?;
        let fd = (up - down) / (2.0 * step);
        let err = (grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-6);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Compares the reverse-mode gradient with central differences.
pub fn grad_check(net: &Network, problem: &GradProblem, step: f64, rng: &mut Rng) -> Result<f64> {
    let (_, g) = loss_and_grad(net, problem.a, problem.input, problem.targets, problem.loss, problem.readout)?;
    finite_difference_error(net, problem, &g.to_vec(), step, rng)
}
