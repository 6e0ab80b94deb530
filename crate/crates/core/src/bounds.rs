//! Filter norms, the multiplicative constants of the convergence bounds,
//! numerical checks of the c-GNN norm and Lipschitz lemmas, and rate fits.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gnn::{apply_head, GnnParams, Head, IdentifierStrategy};
use crate::limit::{cgnn_hidden_states, eta_function, LatentFunction};
use crate::linalg::{abs_matrix, spectral_norm};
use crate::models::GraphModel;

/// Norms of one propagation layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerNorms {
    /// `Σ_k ‖B_k‖`
    pub h2: f64,
    /// `‖|B_0|‖ + Σ_{k≥1} ‖B_k‖`
    pub h_inf: f64,
    /// `Σ_k k ‖B_k‖`
    pub h_d2: f64,
    /// `Σ_k k √(log k) ‖B_k‖`
    pub h_dinf: f64,
    /// `Σ_k k √(log(k+2)) ‖B_k‖`
    pub h_dinf_safe: f64,
    /// `‖B_0‖`
    pub b0: f64,
    /// `‖b‖₂`
    pub bias: f64,
    /// Input width `d_ℓ`.
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterNorms {
    pub layers: Vec<LayerNorms>,
    /// Product of the head weight norms.
    pub lg: f64,
    /// `‖g(0)‖₂`
    pub g0: f64,
    pub dims: Vec<usize>,
}

pub fn filter_norms(params: &GnnParams) -> Result<FilterNorms> {
    params.validate()?;
    let mut layers = Vec::with_capacity(params.depth());
    for layer in &params.layers {
        let norms = layer.filters.iter().map(|b| spectral_norm(b.view())).collect::<Result<Vec<_>>>()?;
        let abs0 = spectral_norm(abs_matrix(layer.filters[0].view()).view())?;
        let kf = |k: usize| k as f64;
        layers.push(LayerNorms {
            h2: norms.iter().sum(),
            h_inf: abs0 + norms[1..].iter().sum::<f64>(),
            h_d2: norms.iter().enumerate().map(|(k, n)| kf(k) * n).sum(),
            h_dinf: norms.iter().enumerate().map(|(k, n)| if k == 0 { 0.0 } else { kf(k) * kf(k).ln().sqrt() * n }).sum(),
            h_dinf_safe: norms.iter().enumerate().map(|(k, n)| kf(k) * (kf(k) + 2.0).ln().sqrt() * n).sum(),
            b0: norms[0],
            bias: layer.bias.dot(&layer.bias).sqrt(),
            width: layer.filters[0].ncols(),
        });
    }
    let lg = match &params.head {
        Head::Square => return Err(Error::Unsupported("the exact-square head is not globally Lipschitz".into())),
        Head::Mlp(h) => h.iter().map(|a| spectral_norm(a.w.view())).collect::<Result<Vec<_>>>()?.iter().product(),
    };
    let zero = Array2::zeros((1, params.hidden_output_dim()));
    let g0 = apply_head(&params.head, params.activation, zero, None).row(0).mapv(|v| v * v).sum().sqrt();
    Ok(FilterNorms { layers, lg, g0, dims: params.dims() })
}

/// Model quantities entering the constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMeta {
    /// Covering dimension `d_X`.
    pub dim: f64,
    /// Diameter `D_X`.
    pub diameter: f64,
    pub lipschitz_w: f64,
    /// Bound on the input function; `‖f^{(0)}‖_∞` when read from a model.
    pub c_f: Option<f64>,
    pub c_eta: Option<f64>,
    pub l_eta: Option<f64>,
}

impl ModelMeta {
    /// Metadata of a GNN setting with input bound `c_f`.
    pub fn for_gnn(model: &GraphModel, c_f: f64) -> Self {
        ModelMeta {
            dim: model.space.covering_dimension(),
            diameter: model.space.diameter(),
            lipschitz_w: model.lipschitz(),
            c_f: Some(c_f),
            c_eta: None,
            l_eta: None,
        }
    }

    /// Metadata of an SGNN setting: `C_η` is the largest `|η|` on the
    /// integration nodes; `L_η` is `L_W` for one- and two-hop inputs
    /// (`T` preserves the Lipschitz constant of `W` since `‖W(·,y)‖_{L²} ≤ 1`) and 0 for one-hot.
    pub fn for_sgnn(model: &GraphModel, strategy: IdentifierStrategy) -> Result<Self> {
        let eta = eta_function(model, strategy)?;
        let c_eta = eta.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l_eta = match strategy {
            IdentifierStrategy::OneHot => 0.0,
            _ => model.lipschitz(),
        };
        Ok(ModelMeta {
            dim: model.space.covering_dimension(),
            diameter: model.space.diameter(),
            lipschitz_w: model.lipschitz(),
            c_f: None,
            c_eta: Some(c_eta),
            l_eta: Some(l_eta),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Gnn,
    Sgnn,
}

/// One named constant. `variant` is `literal`, or `safe` for the forms
/// using `√log(k+2)` in `H_{∂,∞}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub name: String,
    pub value: f64,
    pub variant: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub meta: ModelMeta,
    pub constants: Vec<Constant>,
    /// `Σ_ℓ d_ℓ` over all networks involved.
    pub dims_sum: f64,
}

impl BoundReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.get_variant(name, "literal")
    }

    pub fn get_variant(&self, name: &str, variant: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name && c.variant == variant).map(|c| c.value)
    }

    fn key(&self, base: &str) -> String {
        match self.kind {
            BoundKind::Gnn => base.to_string(),
            BoundKind::Sgnn => format!("{base}'"),
        }
    }

    fn need(&self, name: &str, variant: &str) -> f64 {
        self.get_variant(name, variant).expect("constant present in report")
    }

    /// `R₁(n) = (C₁ √d_X + C₂ √log(Σ d_ℓ / ρ)) / √n`.
    pub fn r1(&self, n: f64, rho: f64) -> f64 {
        self.r1_variant(n, rho, "literal")
    }

    pub fn r1_variant(&self, n: f64, rho: f64, variant: &str) -> f64 {
        let c1 = self.need(&self.key("C1"), variant);
        let c2 = self.need(&self.key("C2"), variant);
        (c1 * self.meta.dim.sqrt() + c2 * (self.dims_sum / rho).ln().sqrt()) / n.sqrt()
    }

    /// `R₂(n) = C_ν C₃ / √(α n)`.
    pub fn r2(&self, n: f64, alpha: f64, c_nu: f64) -> f64 {
        c_nu * self.need(&self.key("C3"), "literal") / (alpha * n).sqrt()
    }

    /// `R₃(n) = C₄ √(log(1/ρ) / n)`.
    pub fn r3(&self, n: f64, rho: f64) -> f64 {
        self.need(&self.key("C4"), "literal") * ((1.0 / rho).ln() / n).sqrt()
    }

    /// CSV `name,value,variant`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "value", "variant"])?;
        for c in &self.constants {
            out.write_record([c.name.as_str(), &c.value.to_string(), c.variant])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn prod(xs: impl Iterator<Item = f64>) -> f64 {
    xs.product()
}

/// `c ∏_{s<ℓ} H_s + Σ_{s<ℓ} ‖b_s‖ ∏_{p=s+1}^{ℓ-1} H_p`.
fn propagated_bound(c: f64, h: &[f64], bias: &[f64], l: usize) -> f64 {
    c * prod(h[..l].iter().copied()) + (0..l).map(|s| bias[s] * prod(h[s + 1..l].iter().copied())).sum::<f64>()
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("bound constants need model metadata '{what}'")))
}

/// GNN constants `C, C^{(ℓ)}, C₁, …, C₄`.
pub fn gnn_constants(params: &GnnParams, meta: &ModelMeta) -> Result<BoundReport> {
    let c_f = need(meta.c_f, "C_f")?;
    let fnorm = filter_norms(params)?;
    let m = fnorm.layers.len();
    let h2: Vec<f64> = fnorm.layers.iter().map(|l| l.h2).collect();
    let hinf: Vec<f64> = fnorm.layers.iter().map(|l| l.h_inf).collect();
    let bias: Vec<f64> = fnorm.layers.iter().map(|l| l.bias).collect();
    let lg = fnorm.lg;

    let c_l: Vec<f64> =
        (0..=m).map(|l| lg * prod(h2[(l + 1).min(m)..].iter().copied()) * propagated_bound(c_f, &hinf, &bias, l)).collect();
    let c = lg * prod(h2.iter().copied());
    let c1_of = |dinf: &dyn Fn(&LayerNorms) -> f64| (0..m).map(|l| c_l[l] * dinf(&fnorm.layers[l])).sum::<f64>();
    let c1 = c1_of(&|l| l.h_dinf);
    let c1_safe = c1_of(&|l| l.h_dinf_safe);
    let growth = 1.0 + meta.diameter * meta.lipschitz_w;
    let c3 = (0..m).map(|l| c_l[l] * fnorm.layers[l].h_d2).sum::<f64>();

    let mut constants = vec![
        konst("C", c, "literal"),
        konst("C1", c1, "literal"),
        konst("C2", c1 * growth, "literal"),
        konst("C3", c3, "literal"),
        konst("C4", c_l[m], "literal"),
        konst("C1", c1_safe, "safe"),
        konst("C2", c1_safe * growth, "safe"),
        konst("L_g", lg, "literal"),
    ];
    for (l, v) in c_l.iter().enumerate() {
        constants.push(konst(&format!("C^({l})"), *v, "literal"));
    }
    push_norms(&mut constants, &fnorm, "");
    Ok(BoundReport { kind: BoundKind::Gnn, meta: meta.clone(), constants, dims_sum: fnorm.dims.iter().sum::<usize>() as f64 })
}

fn konst(name: &str, value: f64, variant: &'static str) -> Constant {
    Constant { name: name.to_string(), value, variant }
}

fn push_norms(out: &mut Vec<Constant>, f: &FilterNorms, tag: &str) {
    for (l, n) in f.layers.iter().enumerate() {
        out.push(konst(&format!("H2{tag}^({l})"), n.h2, "literal"));
        out.push(konst(&format!("Hinf{tag}^({l})"), n.h_inf, "literal"));
        out.push(konst(&format!("Hd2{tag}^({l})"), n.h_d2, "literal"));
        out.push(konst(&format!("Hdinf{tag}^({l})"), n.h_dinf, "literal"));
        out.push(konst(&format!("Hdinf{tag}^({l})"), n.h_dinf_safe, "safe"));
    }
}

/// SGNN constants `D, C̃, C_Φ, L_Φ, C^{(ℓ)}, L^{(ℓ)}, C'^{(ℓ)}, C', C'₁, …, C'₄`
/// for inner network `Φ` and outer network `Φ'`.
pub fn sgnn_constants(inner: &GnnParams, outer: &GnnParams, meta: &ModelMeta) -> Result<BoundReport> {
    let c_eta = need(meta.c_eta, "C_eta")?;
    let l_eta = need(meta.l_eta, "L_eta")?;
    let fi = filter_norms(inner)?;
    let fo = filter_norms(outer)?;
    let (m, mo) = (fi.layers.len(), fo.layers.len());
    let pick = |f: &FilterNorms, g: fn(&LayerNorms) -> f64| f.layers.iter().map(g).collect::<Vec<f64>>();
    let (h2, hinf, b0, bias) = (pick(&fi, |l| l.h2), pick(&fi, |l| l.h_inf), pick(&fi, |l| l.b0), pick(&fi, |l| l.bias));
    let (h2o, hinfo, biaso) = (pick(&fo, |l| l.h2), pick(&fo, |l| l.h_inf), pick(&fo, |l| l.bias));
    let (lg, lgo) = (fi.lg, fo.lg);
    let (lw, dx) = (meta.lipschitz_w, meta.diameter);

    let d = lgo * prod(h2o.iter().copied());
    let ct_inf: Vec<f64> = (0..=m).map(|l| propagated_bound(c_eta, &hinf, &bias, l)).collect();
    let ct_2: Vec<f64> = (0..=m).map(|l| propagated_bound(c_eta, &h2, &bias, l)).collect();
    let c_phi = fi.g0 + lg * ct_inf[m];
    let l_phi = lg
        * (l_eta * prod(b0.iter().copied())
            + lw * (0..m).map(|l| prod(b0[l + 1..].iter().copied()) * ct_2[l]).sum::<f64>());
    let tail2 = |l: usize| prod(h2[(l + 1).min(m)..].iter().copied());
    let c_in: Vec<f64> = (0..m).map(|l| d * lg * tail2(l) * ct_inf[l]).collect();
    let l_in: Vec<f64> = (0..m)
        .map(|l| d * lg * tail2(l) * (lw * ct_inf[l] + (fi.layers[l].width as f64).sqrt() * l_eta * prod(hinf[..l].iter().copied())))
        .collect();
    let c_out: Vec<f64> = (0..=mo)
        .map(|l| lgo * prod(h2o[(l + 1).min(mo)..].iter().copied()) * propagated_bound(c_phi, &hinfo, &biaso, l))
        .collect();
    let c_prime = d * lg * prod(h2.iter().copied());

    let c1_of = |dinf: fn(&LayerNorms) -> f64| {
        d * l_phi
            + (0..mo).map(|l| dinf(&fo.layers[l]) * c_out[l]).sum::<f64>()
            + (0..m).map(|l| dinf(&fi.layers[l]) * c_in[l]).sum::<f64>()
    };
    let c2_of = |dinf: fn(&LayerNorms) -> f64| {
        (1.0 + dx * lw) * (0..mo).map(|l| dinf(&fo.layers[l]) * c_out[l]).sum::<f64>()
            + d * l_phi * dx
            + d * c_phi
            + (0..m).map(|l| dinf(&fi.layers[l]) * (c_in[l] + dx * l_in[l])).sum::<f64>()
    };
    let c3 = (0..mo).map(|l| fo.layers[l].h_d2 * c_out[l]).sum::<f64>() + (0..m).map(|l| fi.layers[l].h_d2 * c_in[l]).sum::<f64>();

    let mut constants = vec![
        konst("C'", c_prime, "literal"),
        konst("C1'", c1_of(|l| l.h_dinf), "literal"),
        konst("C2'", c2_of(|l| l.h_dinf), "literal"),
        konst("C3'", c3, "literal"),
        konst("C4'", c_out[mo], "literal"),
        konst("C1'", c1_of(|l| l.h_dinf_safe), "safe"),
        konst("C2'", c2_of(|l| l.h_dinf_safe), "safe"),
        konst("D", d, "literal"),
        konst("C_Phi", c_phi, "literal"),
        konst("L_Phi", l_phi, "literal"),
        konst("L_g", lg, "literal"),
        konst("L_g'", lgo, "literal"),
    ];
    for l in 0..=m {
        constants.push(konst(&format!("Ctilde_inf^({l})"), ct_inf[l], "literal"));
        constants.push(konst(&format!("Ctilde_2^({l})"), ct_2[l], "literal"));
    }
    for l in 0..m {
        constants.push(konst(&format!("C^({l})"), c_in[l], "literal"));
        constants.push(konst(&format!("L^({l})"), l_in[l], "literal"));
    }
    for (l, v) in c_out.iter().enumerate() {
        constants.push(konst(&format!("C'^({l})"), *v, "literal"));
    }
    push_norms(&mut constants, &fi, "");
    push_norms(&mut constants, &fo, "'");
    let dims_sum = (fi.dims.iter().sum::<usize>() + fo.dims.iter().sum::<usize>()) as f64;
    Ok(BoundReport { kind: BoundKind::Sgnn, meta: meta.clone(), constants, dims_sum })
}

/// Networks whose constants can be computed.
pub enum Architecture<'a> {
    Gnn(&'a GnnParams),
    Sgnn { inner: &'a GnnParams, outer: &'a GnnParams },
}

pub fn theorem_constants(arch: Architecture<'_>, meta: &ModelMeta) -> Result<BoundReport> {
    match arch {
        Architecture::Gnn(p) => gnn_constants(p, meta),
        Architecture::Sgnn { inner, outer } => sgnn_constants(inner, outer, meta),
    }
}

/// Measured norms of `f^{(ℓ)}` against the lemma bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaLayer {
    /// `(Σ_j sup_x |f_j(x)|²)^{1/2}`
    pub sup: f64,
    pub sup_bound: f64,
    /// `(∫ ‖f(x)‖² dP(x))^{1/2}`
    pub l2: f64,
    pub l2_bound: f64,
}

impl LemmaLayer {
    fn ratio(v: f64, b: f64) -> f64 {
        if v == 0.0 {
            0.0
        } else {
            v / b
        }
    }

    pub fn sup_ratio(&self) -> f64 {
        Self::ratio(self.sup, self.sup_bound)
    }

    pub fn l2_ratio(&self) -> f64 {
        Self::ratio(self.l2, self.l2_bound)
    }
}

pub const LEMMA_SLACK: f64 = 1e-9;

fn coordinate_sup(f: &LatentFunction) -> f64 {
    f.values.columns().into_iter().map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2)).sum::<f64>().sqrt()
}

/// Runs the c-GNN and compares each `‖f^{(ℓ)}‖_*` with
/// `‖f‖_* ∏ H_* + Σ ‖b‖ ∏ H_*` for `* ∈ {∞, L²(P)}`. Fails with
/// [`Error::BoundViolation`] when a measured norm exceeds its bound by more than 1e-9.
pub fn lemma_bound_check(params: &GnnParams, model: &GraphModel, f0: &LatentFunction) -> Result<Vec<LemmaLayer>> {
    let fnorm = filter_norms_any_head(params)?;
    let states = cgnn_hidden_states(params, model, f0)?;
    let h2: Vec<f64> = fnorm.iter().map(|l| l.h2).collect();
    let hinf: Vec<f64> = fnorm.iter().map(|l| l.h_inf).collect();
    let bias: Vec<f64> = fnorm.iter().map(|l| l.bias).collect();
    let (sup0, l20) = (coordinate_sup(f0), f0.l2_norm());
    let mut out = Vec::with_capacity(states.len());
    for (l, f) in states.iter().enumerate() {
        let layer = LemmaLayer {
            sup: coordinate_sup(f),
            sup_bound: propagated_bound(sup0, &hinf, &bias, l),
            l2: f.l2_norm(),
            l2_bound: propagated_bound(l20, &h2, &bias, l),
        };
        if layer.sup > layer.sup_bound + LEMMA_SLACK || layer.l2 > layer.l2_bound + LEMMA_SLACK {
            return Err(Error::BoundViolation(format!("layer {l}: {layer:?}")));
        }
        out.push(layer);
    }
    Ok(out)
}

/// Layer norms without requiring a Lipschitz head.
fn filter_norms_any_head(params: &GnnParams) -> Result<Vec<LayerNorms>> {
    let mut p = params.clone();
    p.head = Head::Mlp(vec![]);
    Ok(filter_norms(&p)?.layers)
}

/// Largest ratio of `‖f^{(ℓ)}(x) − f^{(ℓ)}(x')‖` to the lemma's Lipschitz
/// bound over all node pairs and layers. Fails when a pair exceeds its bound by more than 1e-9.
pub fn lemma_lipschitz_check(params: &GnnParams, model: &GraphModel, f0: &LatentFunction) -> Result<f64> {
    let norms = filter_norms_any_head(params)?;
    let states = cgnn_hidden_states(params, model, f0)?;
    let b0: Vec<f64> = norms.iter().map(|l| l.b0).collect();
    let h2: Vec<f64> = norms.iter().map(|l| l.h2).collect();
    let bias: Vec<f64> = norms.iter().map(|l| l.bias).collect();
    let lw = model.lipschitz();
    let l20 = f0.l2_norm();
    let nodes = &f0.nodes;
    let mut worst: f64 = 0.0;
    for (l, f) in states.iter().enumerate().skip(1) {
        let gain = prod(b0[..l].iter().copied());
        let slope = lw
            * (0..l)
                .map(|s| {
                    prod(b0[s + 1..l].iter().copied())
                        * (l20 * prod(h2[..=s].iter().copied())
                            + (0..s).map(|p| bias[p] * prod(h2[p + 1..=s].iter().copied())).sum::<f64>())
                })
                .sum::<f64>();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let dist = model.space.distance(&nodes[i], &nodes[j]);
                let lhs = (&f.values.row(i) - &f.values.row(j)).mapv(|v| v * v).sum().sqrt();
                let d0 = (&f0.values.row(i) - &f0.values.row(j)).mapv(|v| v * v).sum().sqrt();
                let rhs = gain * d0 + slope * dist;
                if lhs > rhs + LEMMA_SLACK {
                    return Err(Error::BoundViolation(format!("layer {l}, nodes ({i}, {j}): {lhs} > {rhs}")));
                }
                if lhs > 0.0 {
                    worst = worst.max(lhs / rhs);
                }
            }
        }
    }
    Ok(worst)
}

/// Least-squares fit of `log median(stat)` against `log n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
    /// `(n, median)` pairs used.
    pub medians: Vec<(f64, f64)>,
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Medians per distinct `n` of `(n, statistic)` rows, in increasing `n`.
pub fn medians_by_n(rows: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut ns: Vec<f64> = rows.iter().map(|r| r.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut v: Vec<f64> = rows.iter().filter(|r| r.0 == n).map(|r| r.1).collect();
            (n, median(&mut v))
        })
        .collect()
}

/// Needs at least 4 distinct `n` and 5 trials at each.
pub fn rate_audit(rows: &[(f64, f64)]) -> Result<RateFit> {
    if let Some(r) = rows.iter().find(|r| !(r.1 > 0.0) || !(r.0 > 0.0)) {
        return Err(Error::Data(format!("rate fit needs positive n and statistics, got {r:?}")));
    }
    let med = medians_by_n(rows);
    if med.len() < 4 {
        return Err(Error::Data(format!("rate fit needs at least 4 distinct n, got {}", med.len())));
    }
    for &(n, _) in &med {
        let count = rows.iter().filter(|r| r.0 == n).count();
        if count < 5 {
            return Err(Error::Data(format!("rate fit needs at least 5 trials per n, n = {n} has {count}")));
        }
    }
    let xs: Vec<f64> = med.iter().map(|m| m.0.ln()).collect();
    let ys: Vec<f64> = med.iter().map(|m| m.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / k).sqrt();
    Ok(RateFit { slope, intercept, residual, medians: med })
}

/// Rate dominance: the constant `c = slack · stat(n₀)/bound(n₀)` is fitted on
/// the smallest `n` and held fixed; reports whether `stat(n) ≤ c · bound(n)` everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Dominance {
    pub constant: f64,
    /// `stat(n) / (c · bound(n))` per `n`.
    pub ratios: Vec<(f64, f64)>,
    pub holds: bool,
}

pub fn rate_dominance(medians: &[(f64, f64)], bound: impl Fn(f64) -> f64, slack: f64) -> Result<Dominance> {
    let &(n0, s0) = medians.first().ok_or_else(|| Error::Data("no medians to calibrate on".into()))?;
    let constant = slack * s0 / bound(n0);
    let ratios: Vec<(f64, f64)> = medians.iter().map(|&(n, s)| (n, s / (constant * bound(n)))).collect();
    let holds = ratios.iter().all(|r| r.1 <= 1.0);
    Ok(Dominance { constant, ratios, holds })
}
