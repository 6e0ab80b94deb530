//! Text descriptions of models, e.g. `space=interval:-1,1`,
//! `kernel=gaussian:sigma=0.3`, `dist=uniform`.

use std::collections::BTreeMap;

use ndarray::Array2;

use super::{
    counterexample_model, AdditiveInner, DensityShape, Distribution, DotProfile, GraphModel, IntervalDensity, Kernel,
    LatentSpace, RadialProfile,
};
use crate::error::{Error, Result};

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| cfg(format!("expected a number, got '{s}'")))
}

fn named_params(s: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| cfg(format!("expected key=value, got '{part}'")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take(params: &BTreeMap<String, String>, key: &str, what: &str) -> Result<f64> {
    num(params.get(key).ok_or_else(|| cfg(format!("{what} needs '{key}='")))?)
}

pub fn parse_space(s: &str) -> Result<LatentSpace> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let space = match kind.trim() {
        "finite" => LatentSpace::Finite { k: rest.trim().parse().map_err(|_| cfg(format!("bad class count '{rest}'")))? },
        "interval" => {
            let (a, b) = rest.split_once(',').ok_or_else(|| cfg("interval needs 'a,b'"))?;
            LatentSpace::Interval { a: num(a)?, b: num(b)? }
        }
        "sphere" => LatentSpace::Sphere { d: rest.trim().parse().map_err(|_| cfg(format!("bad sphere dimension '{rest}'")))? },
        other => return Err(cfg(format!("unknown space kind '{other}'"))),
    };
    space.validate()?;
    Ok(space)
}

fn parse_radial(name: &str, rest: &str) -> Result<RadialProfile> {
    let p = named_params(rest)?;
    Ok(match name {
        "gaussian" => RadialProfile::Gaussian { sigma: take(&p, "sigma", "gaussian")? },
        "laplace" => RadialProfile::Laplace { scale: take(&p, "scale", "laplace")? },
        "triangle" => RadialProfile::Triangle { width: take(&p, "width", "triangle")? },
        "constant" => RadialProfile::Constant { c: take(&p, "c", "constant")? },
        other => return Err(cfg(format!("unknown radial profile '{other}'"))),
    })
}

pub fn parse_kernel(s: &str) -> Result<Kernel> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let kernel = match kind.trim() {
        "sbm" => {
            let rows: Vec<Vec<f64>> = rest
                .split(';')
                .map(|r| r.split(',').map(num).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let k = rows.len();
            if rows.iter().any(|r| r.len() != k) {
                return Err(cfg("sbm matrix must be square"));
            }
            Kernel::Sbm { w: Array2::from_shape_fn((k, k), |(i, j)| rows[i][j]) }
        }
        "gaussian" | "laplace" | "triangle" | "constant" => Kernel::Radial(parse_radial(kind.trim(), rest)?),
        "radial" => {
            let (name, params) = rest.split_once(':').unwrap_or((rest, ""));
            Kernel::Radial(parse_radial(name.trim(), params)?)
        }
        "additive" => {
            let p = named_params(rest)?;
            let inner = match p.get("v").map(String::as_str).unwrap_or("identity") {
                "identity" => AdditiveInner::Identity,
                "tanh" => AdditiveInner::Tanh,
                "cube" => AdditiveInner::Cube,
                other => return Err(cfg(format!("unknown additive inner map '{other}'"))),
            };
            let scale = p.get("scale").map(|v| num(v)).transpose()?.unwrap_or(1.0);
            Kernel::Additive { scale, inner }
        }
        "dot" => {
            let (name, params) = rest.split_once(':').unwrap_or((rest, ""));
            match name.trim() {
                "exp" => Kernel::DotProduct(DotProfile::Exp { beta: take(&named_params(params)?, "beta", "dot:exp")? }),
                "affine" => Kernel::DotProduct(DotProfile::Affine),
                other => return Err(cfg(format!("unknown dot-product profile '{other}'"))),
            }
        }
        other => return Err(cfg(format!("unknown kernel kind '{other}'"))),
    };
    kernel.validate()?;
    Ok(kernel)
}

/// Parses a distribution; interval shapes take their bounds from `space`.
pub fn parse_distribution(s: &str, space: &LatentSpace) -> Result<Distribution> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let interval = || match *space {
        LatentSpace::Interval { a, b } => Ok((a, b)),
        _ => Err(cfg(format!("distribution '{kind}' needs an interval space"))),
    };
    Ok(match (kind.trim(), space) {
        ("uniform", LatentSpace::Sphere { d }) => Distribution::sphere_uniform(*d),
        ("uniform", LatentSpace::Finite { k }) => Distribution::finite(vec![1.0 / *k as f64; *k])?,
        ("uniform", _) => {
            let (a, b) = interval()?;
            Distribution::Interval(IntervalDensity::uniform(a, b)?)
        }
        ("finite", _) => Distribution::finite(rest.split(',').map(num).collect::<Result<_>>()?)?,
        ("narrow", _) => {
            let (a, b) = interval()?;
            let p = named_params(rest)?;
            Distribution::Interval(IntervalDensity::narrow(a, b, take(&p, "center", "narrow")?, take(&p, "width", "narrow")?)?)
        }
        ("skewed", _) => Distribution::Interval(IntervalDensity::skewed()?),
        ("piecewise", _) => {
            let knots = rest
                .split(',')
                .map(|kv| {
                    let (x, y) = kv.split_once(':').ok_or_else(|| cfg(format!("piecewise knot '{kv}' is not x:y")))?;
                    Ok((num(x)?, num(y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Distribution::Interval(IntervalDensity::from_knots(DensityShape::Piecewise, knots)?)
        }
        (other, _) => return Err(cfg(format!("unknown distribution '{other}'"))),
    })
}

/// Resolved textual model description.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub space: String,
    pub kernel: String,
    pub dist: String,
    /// Integration nodes for interval and sphere models.
    pub grid: Option<usize>,
}

impl ModelSpec {
    pub fn new(space: &str, kernel: &str, dist: &str) -> Self {
        ModelSpec { space: space.into(), kernel: kernel.into(), dist: dist.into(), grid: None }
    }

    /// Reads `space`, `kernel`, `dist`, `grid` or the `model=counterexample:gamma=…` shortcut.
    pub fn from_map(map: &BTreeMap<String, String>, default: &ModelSpec) -> Result<Self> {
        let mut spec = default.clone();
        if let Some(m) = map.get("model") {
            let (name, rest) = m.split_once(':').unwrap_or((m, ""));
            if name != "counterexample" {
                return Err(cfg(format!("unknown model preset '{name}'")));
            }
            let gamma = named_params(rest)?.get("gamma").map(|g| num(g)).transpose()?.unwrap_or(0.5);
            spec = counterexample_spec(gamma);
        }
        for (key, slot) in [("space", &mut spec.space), ("kernel", &mut spec.kernel), ("dist", &mut spec.dist)] {
            if let Some(v) = map.get(key) {
                *slot = v.clone();
            }
        }
        if let Some(g) = map.get("grid") {
            spec.grid = Some(g.parse().map_err(|_| cfg(format!("bad grid size '{g}'")))?);
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<GraphModel> {
        parse_model(self)
    }

    /// `key=value` lines describing the spec.
    pub fn describe(&self) -> String {
        let mut s = format!("space={} kernel={} dist={}", self.space, self.kernel, self.dist);
        if let Some(g) = self.grid {
            s.push_str(&format!(" grid={g}"));
        }
        s
    }
}

/// Text form of the two-class counterexample model.
pub fn counterexample_spec(gamma: f64) -> ModelSpec {
    let m = counterexample_model(gamma.clamp(0.0, 1.0)).expect("valid gamma");
    let Kernel::Sbm { w } = &m.kernel else { unreachable!() };
    ModelSpec::new(
        "finite:2",
        &format!("sbm:{},{};{},{}", w[[0, 0]], w[[0, 1]], w[[1, 0]], w[[1, 1]]),
        &format!("finite:{},{}", 1.0 / 3.0, 2.0 / 3.0),
    )
}

pub fn parse_model(spec: &ModelSpec) -> Result<GraphModel> {
    let space = parse_space(&spec.space)?;
    let kernel = parse_kernel(&spec.kernel)?;
    let mut dist = parse_distribution(&spec.dist, &space)?;
    if let Some(g) = spec.grid {
        dist = dist.with_resolution(g);
    }
    GraphModel::new(space, kernel, dist)
}
