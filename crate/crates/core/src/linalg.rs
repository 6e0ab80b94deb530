//! Dense helpers: power-iteration operator norms and small matrix utilities.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;

use crate::error::{Error, Result};

pub const DEFAULT_NORM_TOL: f64 = 1e-6;
pub const MAX_POWER_ITERATIONS: usize = 10_000;

/// Largest singular value of a symmetric matrix by power iteration.
///
/// The estimate is `‖m v‖` for the current unit iterate `v`, i.e. the square
/// root of the Rayleigh quotient of `m²`. Working with `m²` makes the
/// iteration insensitive to the sign of the extreme eigenvalue (a pair
/// `±λ` no longer oscillates). Stops when the relative residual of `m²`
/// at the iterate drops below `tol`.
pub fn operator_norm(m: ArrayView2<f64>, tol: f64) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("operator_norm needs a square matrix, got {}x{}", n, m.ncols())));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut rng = crate::rng::seeded(0x5EED_0F_0BE7A);
    let mut v: Array1<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    v /= norm2(&v);
    let mut w = m.dot(&v);
    let mut sigma = norm2(&w);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_POWER_ITERATIONS {
        if sigma == 0.0 {
            // v is in the kernel; restart from a fresh direction once, else m is zero.
            if m.iter().all(|&x| x == 0.0) {
                return Ok(0.0);
            }
            v = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            v /= norm2(&v);
            w = m.dot(&v);
            sigma = norm2(&w);
            continue;
        }
        let next_v = &w / sigma;
        let next_w = m.dot(&next_v);
        // ‖m²v − σ²v‖ / σ² = ‖m v' − σ v‖ / σ with v' = m v / σ.
        residual = norm2(&(&next_w - &(&v * sigma))) / sigma;
        let next_sigma = norm2(&next_w);
        v = next_v;
        w = next_w;
        let prev = sigma;
        sigma = next_sigma;
        if residual <= tol {
            return Ok(sigma.max(prev));
        }
    }
    Err(Error::Convergence { iterations: MAX_POWER_ITERATIONS, residual })
}

/// Spectral norm of a rectangular matrix through the smaller Gram matrix.
pub fn spectral_norm(b: ArrayView2<f64>) -> Result<f64> {
    if b.is_empty() {
        return Ok(0.0);
    }
    let gram = if b.nrows() <= b.ncols() { b.dot(&b.t()) } else { b.t().dot(&b) };
    Ok(operator_norm(gram.view(), 1e-12)?.sqrt())
}

pub fn norm2(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

pub fn frobenius(m: ArrayView2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Entrywise absolute value.
pub fn abs_matrix(m: ArrayView2<f64>) -> Array2<f64> {
    m.mapv(f64::abs)
}

/// Sum of rows weighted by `w` (a `1 × d` reduction of an `n × d` matrix).
pub fn weighted_row_sum(m: ArrayView2<f64>, w: &[f64]) -> Array1<f64> {
    let mut out = Array1::zeros(m.ncols());
    for (row, &wi) in m.axis_iter(Axis(0)).zip(w) {
        out.scaled_add(wi, &row);
    }
    out
}

/// Sum of a slice by pairwise reduction, fixed order for any input length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}
