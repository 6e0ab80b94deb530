use ndarray::array;

use super::{Distribution, GraphModel, Kernel, LatentSpace, Point};
use crate::error::{Error, Result};

/// Largest simplex dimension accepted by [`is_incoherent`].
pub const INCOHERENCE_MAX_K: usize = 20;

const SYMMETRY_TOL: f64 = 1e-8;

/// Two-class model with `P = (1/3, 2/3)` and
/// `W_γ = [[γ, (1−γ)/2], [(1−γ)/2, (1+γ)/4]]`; its degree function is `1/3` for every γ.
pub fn counterexample_model(gamma: f64) -> Result<GraphModel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} is outside [0, 1]")));
    }
    let off = (1.0 - gamma) / 2.0;
    let w = array![[gamma, off], [off, (1.0 + gamma) / 4.0]];
    GraphModel::new(
        LatentSpace::Finite { k: 2 },
        Kernel::Sbm { w },
        Distribution::Finite { p: vec![1.0 / 3.0, 2.0 / 3.0] },
    )
}

/// `∫ W(x, y) dP(y)`: an exact sum on finite spaces, quadrature otherwise.
pub fn degree_function(model: &GraphModel, x: &Point) -> Result<f64> {
    model.space.check(x)?;
    let (nodes, weights) = model.dist.quadrature();
    Ok(nodes.iter().zip(&weights).map(|(y, w)| w * model.eval(x, y)).sum())
}

/// True iff no nonzero `s ∈ {−1, 0, 1}^K` has `|Σ s_k p_k| ≤ 1e-12·K`.
///
/// Meet-in-the-middle over the two halves of the index set: `2·3^{K/2}`
/// partial sums, sorted once, instead of `3^K` full combinations.
pub fn is_incoherent(p: &[f64]) -> Result<bool> {
    let k = p.len();
    if k > INCOHERENCE_MAX_K {
        return Err(Error::Size(format!("incoherence search is limited to K <= {INCOHERENCE_MAX_K}, got {k}")));
    }
    if k == 0 {
        return Err(Error::Domain("empty probability vector".into()));
    }
    let tol = 1e-12 * k as f64;
    let (left, right) = p.split_at(k / 2);
    let ls = signed_sums(left);
    let mut rs = signed_sums(right);
    rs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(l, l_zero) in &ls {
        let start = rs.partition_point(|r| r.0 < -l - tol);
        for &(r, r_zero) in &rs[start..] {
            if r > -l + tol {
                break;
            }
            if !(l_zero && r_zero) && (l + r).abs() <= tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All `3^len` signed sums, each tagged with whether the sign vector is zero.
fn signed_sums(p: &[f64]) -> Vec<(f64, bool)> {
    let mut out = vec![(0.0, true)];
    for &v in p {
        let mut next = Vec::with_capacity(out.len() * 3);
        for &(s, z) in &out {
            next.push((s, z));
            next.push((s + v, false));
            next.push((s - v, false));
        }
        out = next;
    }
    out
}

/// Odd moments `∫ t^{2k+1} dP`, `k = 0..=k_max`, and whether all vanish to 1e-8.
pub fn odd_moment_symmetry_test(dist: &Distribution, k_max: usize) -> Result<(Vec<f64>, bool)> {
    let Distribution::Interval(d) = dist else {
        return Err(Error::Unsupported("odd-moment test needs an interval distribution".into()));
    };
    let moments: Vec<f64> = (0..=k_max).map(|k| d.expect(|t| t.powi(2 * k as i32 + 1))).collect();
    let symmetric = moments.iter().all(|m| m.abs() < SYMMETRY_TOL);
    Ok((moments, symmetric))
}
