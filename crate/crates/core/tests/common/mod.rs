//! Independent oracles shared by the integration tests: explicit-loop forward
//! passes, a literal transcription of the bound constants, and permutation helpers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use graphlimit::bounds::ModelMeta;
use graphlimit::gnn::{Activation, GnnParams, Head, IdentifierStrategy, Readout};
use graphlimit::rng::Rng;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

pub fn act(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Relu => {
            if x > 0.0 {
                x
            } else {
                0.0
            }
        }
        Activation::Identity => x,
        Activation::Tanh => x.tanh(),
    }
}

fn matvec_rows(s: &[Vec<f64>], z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = s.len();
    let d = z[0].len();
    let mut out = vec![vec![0.0; d]; n];
    for i in 0..n {
        for j in 0..n {
            for c in 0..d {
                out[i][c] += s[i][j] * z[j][c];
            }
        }
    }
    out
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Array2<f64> {
    let d = rows.first().map_or(0, |r| r.len());
    Array2::from_shape_fn((rows.len(), d), |(i, c)| rows[i][c])
}

fn head_row(params: &GnnParams, x: &[f64]) -> Vec<f64> {
    match &params.head {
        Head::Square => x.iter().map(|v| v * v).collect(),
        Head::Mlp(layers) => {
            let mut x = x.to_vec();
            for (l, a) in layers.iter().enumerate() {
                let mut y = vec![0.0; a.w.nrows()];
                for o in 0..a.w.nrows() {
                    y[o] = a.b[o];
                    for i in 0..a.w.ncols() {
                        y[o] += a.w[[o, i]] * x[i];
                    }
                }
                if l + 1 < layers.len() {
                    y = y.into_iter().map(|v| act(params.activation, v)).collect();
                }
                x = y;
            }
            x
        }
    }
}

/// Layer stack with an explicit operator `s` and integration weights `w`.
pub fn naive_gnn_with(params: &GnnParams, s: &[Vec<f64>], w: &[f64], z0: &Array2<f64>, readout: Readout) -> Array2<f64> {
    let n = s.len();
    let mut z = to_rows(z0);
    for layer in &params.layers {
        let d_out = layer.bias.len();
        let mut pre = vec![vec![0.0; d_out]; n];
        let mut p = z.clone();
        for (k, b) in layer.filters.iter().enumerate() {
            if k > 0 {
                p = matvec_rows(s, &p);
            }
            for i in 0..n {
                for o in 0..d_out {
                    for c in 0..b.ncols() {
                        pre[i][o] += p[i][c] * b[[o, c]];
                    }
                }
            }
        }
        z = pre
            .into_iter()
            .map(|row| row.into_iter().enumerate().map(|(o, v)| act(params.activation, v + layer.bias[o])).collect())
            .collect();
    }
    match readout {
        Readout::Equivariant => from_rows(&z.iter().map(|r| head_row(params, r)).collect::<Vec<_>>()),
        Readout::Invariant => {
            let d = z[0].len();
            let mut mean = vec![0.0; d];
            for (i, r) in z.iter().enumerate() {
                for c in 0..d {
                    mean[c] += w[i] * r[c];
                }
            }
            from_rows(&[head_row(params, &mean)])
        }
    }
}

/// `Φ_A(Z)` with `S = A/n`, written with plain loops.
pub fn naive_gnn(params: &GnnParams, a: &Array2<f64>, z0: &Array2<f64>, readout: Readout) -> Array2<f64> {
    let n = a.nrows();
    let s: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[[i, j]] / n as f64).collect()).collect();
    naive_gnn_with(params, &s, &vec![1.0 / n as f64; n], z0, readout)
}

/// `E_q(A)` as a column, built entry by entry.
pub fn naive_identifier(strategy: IdentifierStrategy, a: &Array2<f64>, q: usize) -> Array2<f64> {
    let n = a.nrows();
    Array2::from_shape_fn((n, 1), |(i, _)| match strategy {
        IdentifierStrategy::OneHot => f64::from(i == q),
        IdentifierStrategy::OneHop => a[[i, q]],
        IdentifierStrategy::TwoHop => (0..n).map(|k| a[[i, k]] * a[[k, q]]).sum::<f64>() / n as f64,
    })
}

/// `Φ'_A((1/n) Σ_q Φ_A(E_q))` one identifier at a time.
pub fn naive_sgnn(inner: &GnnParams, outer: &GnnParams, strategy: IdentifierStrategy, a: &Array2<f64>, readout: Readout) -> Array2<f64> {
    let n = a.nrows();
    let mut pooled = Array2::zeros((n, inner.output_dim()));
    for q in 0..n {
        let h = naive_gnn(inner, a, &naive_identifier(strategy, a, q), Readout::Equivariant);
        pooled = pooled + h / n as f64;
    }
    naive_gnn(outer, a, &pooled, readout)
}

pub fn spectral_norm(m: &Array2<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let d = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]]);
    d.singular_values().iter().fold(0.0f64, |a, &b| a.max(b))
}

/// Per-layer norms transcribed from their definitions.
pub struct OracleNorms {
    pub h2: Vec<f64>,
    pub hinf: Vec<f64>,
    pub hd2: Vec<f64>,
    pub hdinf: Vec<f64>,
    pub b0: Vec<f64>,
    pub bias: Vec<f64>,
    pub width: Vec<usize>,
    pub lg: f64,
    pub g0: f64,
}

pub fn oracle_norms(p: &GnnParams) -> OracleNorms {
    let mut o = OracleNorms { h2: vec![], hinf: vec![], hd2: vec![], hdinf: vec![], b0: vec![], bias: vec![], width: vec![], lg: 1.0, g0: 0.0 };
    for layer in &p.layers {
        let (mut h2, mut hinf, mut hd2, mut hdinf) = (0.0, 0.0, 0.0, 0.0);
        for (k, b) in layer.filters.iter().enumerate() {
            let nb = spectral_norm(b);
            let kf = k as f64;
            h2 += nb;
            hinf += if k == 0 { spectral_norm(&b.mapv(f64::abs)) } else { nb };
            hd2 += kf * nb;
            if k >= 1 {
                hdinf += kf * kf.ln().sqrt() * nb;
            }
        }
        o.h2.push(h2);
        o.hinf.push(hinf);
        o.hd2.push(hd2);
        o.hdinf.push(hdinf);
        o.b0.push(spectral_norm(&layer.filters[0]));
        o.bias.push(layer.bias.iter().map(|v| v * v).sum::<f64>().sqrt());
        o.width.push(layer.filters[0].ncols());
    }
    if let Head::Mlp(h) = &p.head {
        for a in h {
            o.lg *= spectral_norm(&a.w);
        }
    }
    let width = p.layers.last().map_or(p.input_dim, |l| l.bias.len());
    o.g0 = head_row(p, &vec![0.0; width]).iter().map(|v| v * v).sum::<f64>().sqrt();
    o
}

fn product(xs: &[f64], from: usize, to_inclusive: isize) -> f64 {
    let mut p = 1.0;
    let mut s = from as isize;
    while s <= to_inclusive {
        p *= xs[s as usize];
        s += 1;
    }
    p
}

/// `c ∏_{s=0}^{ℓ-1} H^{(s)} + Σ_{s=0}^{ℓ-1} ‖b^{(s)}‖ ∏_{p=s+1}^{ℓ-1} H^{(p)}`.
fn bounded(c: f64, h: &[f64], bias: &[f64], l: usize) -> f64 {
    let li = l as isize;
    let mut v = c * product(h, 0, li - 1);
    for s in 0..l {
        v += bias[s] * product(h, s + 1, li - 1);
    }
    v
}

/// GNN constants evaluated straight from their defining formulas.
pub fn transcribed_gnn_constants(p: &GnnParams, meta: &ModelMeta) -> BTreeMap<String, f64> {
    let o = oracle_norms(p);
    let m = o.h2.len();
    let mi = m as isize;
    let c_f = meta.c_f.unwrap();
    let c_l = |l: usize| o.lg * product(&o.h2, l + 1, mi - 1) * bounded(c_f, &o.hinf, &o.bias, l);
    let mut out = BTreeMap::new();
    out.insert("C".into(), o.lg * product(&o.h2, 0, mi - 1));
    let c1: f64 = (0..m).map(|l| c_l(l) * o.hdinf[l]).sum();
    out.insert("C1".into(), c1);
    out.insert("C2".into(), c1 * (1.0 + meta.diameter * meta.lipschitz_w));
    out.insert("C3".into(), (0..m).map(|l| c_l(l) * o.hd2[l]).sum());
    out.insert("C4".into(), c_l(m));
    for l in 0..=m {
        out.insert(format!("C^({l})"), c_l(l));
    }
    out
}

/// SGNN constants evaluated straight from their defining formulas.
pub fn transcribed_sgnn_constants(inner: &GnnParams, outer: &GnnParams, meta: &ModelMeta) -> BTreeMap<String, f64> {
    let fi = oracle_norms(inner);
    let fo = oracle_norms(outer);
    let (m, mo) = (fi.h2.len(), fo.h2.len());
    let (mi, moi) = (m as isize, mo as isize);
    let (c_eta, l_eta) = (meta.c_eta.unwrap(), meta.l_eta.unwrap());
    let (lw, dx) = (meta.lipschitz_w, meta.diameter);

    let d = fo.lg * product(&fo.h2, 0, moi - 1);
    let ct_inf = |l: usize| bounded(c_eta, &fi.hinf, &fi.bias, l);
    let ct_2 = |l: usize| bounded(c_eta, &fi.h2, &fi.bias, l);
    let c_phi = fi.g0 + fi.lg * ct_inf(m);
    let mut l_phi = l_eta * product(&fi.b0, 0, mi - 1);
    for l in 0..m {
        l_phi += lw * product(&fi.b0, l + 1, mi - 1) * ct_2(l);
    }
    l_phi *= fi.lg;
    let c_in = |l: usize| d * fi.lg * product(&fi.h2, l + 1, mi - 1) * ct_inf(l);
    let l_in = |l: usize| {
        d * fi.lg
            * product(&fi.h2, l + 1, mi - 1)
            * (lw * ct_inf(l) + (fi.width[l] as f64).sqrt() * l_eta * product(&fi.hinf, 0, l as isize - 1))
    };
    let c_out = |l: usize| fo.lg * product(&fo.h2, l + 1, moi - 1) * bounded(c_phi, &fo.hinf, &fo.bias, l);

    let mut c1 = d * l_phi;
    let mut c2 = d * l_phi * dx + d * c_phi;
    let mut c3 = 0.0;
    for l in 0..mo {
        c1 += fo.hdinf[l] * c_out(l);
        c2 += (1.0 + dx * lw) * fo.hdinf[l] * c_out(l);
        c3 += fo.hd2[l] * c_out(l);
    }
    for l in 0..m {
        c1 += fi.hdinf[l] * c_in(l);
        c2 += fi.hdinf[l] * (c_in(l) + dx * l_in(l));
        c3 += fi.hd2[l] * c_in(l);
    }

    let mut out = BTreeMap::new();
    out.insert("C'".into(), d * fi.lg * product(&fi.h2, 0, mi - 1));
    out.insert("C1'".into(), c1);
    out.insert("C2'".into(), c2);
    out.insert("C3'".into(), c3);
    out.insert("C4'".into(), c_out(mo));
    out.insert("D".into(), d);
    out.insert("C_Phi".into(), c_phi);
    out.insert("L_Phi".into(), l_phi);
    for l in 0..m {
        out.insert(format!("C^({l})"), c_in(l));
        out.insert(format!("L^({l})"), l_in(l));
    }
    for l in 0..=mo {
        out.insert(format!("C'^({l})"), c_out(l));
    }
    out
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn random_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `σAσᵀ` where node `i` of the result is node `perm[i]` of `a`.
pub fn permute_adjacency(a: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn(a.dim(), |(i, j)| a[[perm[i], perm[j]]])
}

pub fn permute_rows(z: &Array2<f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn(z.dim(), |(i, c)| z[[perm[i], c]])
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs_diff1(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Median of a copy of `xs`.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Ordinary least squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `Σ_y p_y (Σ_z p_z W(x,z) W(z,y))^2` for a 2-class SBM, by brute force.
pub fn two_class_quartic(w: [[f64; 2]; 2], p: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let mut eta = 0.0;
            for z in 0..2 {
                eta += p[z] * w[x][z] * w[z][y];
            }
            total += p[x] * p[y] * eta * eta;
        }
    }
    total
}
