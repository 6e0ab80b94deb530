//! Sampling graphs from a latent-position model, in deterministic or
//! Bernoulli edge mode, and the concentration diagnostic `‖A − W(X)‖/n`.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{GraphModel, Point};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeMode {
    /// `a_ij = W(x_i, x_j)`
    Deterministic,
    /// `a_ij = α⁻¹ Bernoulli(α W(x_i, x_j))`
    Bernoulli,
}

impl EdgeMode {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeMode::Deterministic => "deterministic",
            EdgeMode::Bernoulli => "bernoulli",
        }
    }
}

impl std::str::FromStr for EdgeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(EdgeMode::Deterministic),
            "bernoulli" => Ok(EdgeMode::Bernoulli),
            _ => Err(Error::Config(format!("unknown edge mode '{s}'"))),
        }
    }
}

/// Sparsity level as a function of `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaRule {
    Constant(f64),
    /// `c · n^{-exponent}`
    Power { c: f64, exponent: f64 },
    /// `c · log(n) / n`
    LogOverN { c: f64 },
}

impl AlphaRule {
    /// `α_n`, clamped to `(0, 1]`.
    pub fn alpha(&self, n: usize) -> f64 {
        let n = n as f64;
        let a = match *self {
            AlphaRule::Constant(c) => c,
            AlphaRule::Power { c, exponent } => c * n.powf(-exponent),
            AlphaRule::LogOverN { c } => c * n.ln() / n,
        };
        a.min(1.0)
    }

    pub fn describe(&self) -> String {
        match *self {
            AlphaRule::Constant(c) => format!("const:{c}"),
            AlphaRule::Power { c, exponent } => format!("power:c={c},exponent={exponent}"),
            AlphaRule::LogOverN { c } => format!("logn:c={c}"),
        }
    }
}

impl std::str::FromStr for AlphaRule {
    type Err = Error;
    /// `const:0.5`, `cuberoot` (`n^{-1/3}`), `power:c=1,exponent=0.5`, `logn:c=2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad alpha rule '{s}'"));
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut c = 1.0;
        let mut exponent = 1.0 / 3.0;
        let rule = match name {
            "const" | "constant" => AlphaRule::Constant(if rest.is_empty() { 1.0 } else { rest.parse().map_err(|_| bad())? }),
            "cuberoot" | "power" | "logn" => {
                for kv in rest.split(',').filter(|t| !t.is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                    let v: f64 = v.trim().parse().map_err(|_| bad())?;
                    match k.trim() {
                        "c" => c = v,
                        "exponent" if name == "power" => exponent = v,
                        _ => return Err(bad()),
                    }
                }
                if name == "logn" {
                    AlphaRule::LogOverN { c }
                } else {
                    AlphaRule::Power { c, exponent }
                }
            }
            _ => return Err(bad()),
        };
        let ok = match rule {
            AlphaRule::Constant(a) => a > 0.0 && a <= 1.0,
            AlphaRule::Power { c, exponent } => c > 0.0 && exponent >= 0.0,
            AlphaRule::LogOverN { c } => c > 0.0,
        };
        if ok {
            Ok(rule)
        } else {
            Err(Error::Domain(format!("alpha rule '{s}' does not give a level in (0, 1]")))
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomGraph {
    pub adjacency: Array2<f64>,
    pub latents: Vec<Point>,
    pub alpha: f64,
    pub mode: EdgeMode,
}

impl RandomGraph {
    pub fn n(&self) -> usize {
        self.latents.len()
    }

    /// Writes `edges.csv` (`i,j,value`, upper triangle, nonzero entries) and
    /// `latents.csv` (one latent per row) into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("edges.csv"))?;
        w.write_record(["i", "j", "value"])?;
        for i in 0..self.n() {
            for j in i..self.n() {
                let v = self.adjacency[[i, j]];
                if v != 0.0 {
                    w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("latents.csv"))?);
        writeln!(f, "latent")?;
        for x in &self.latents {
            match x {
                Point::Sphere(v) => {
                    let s: Vec<String> = v.iter().map(f64::to_string).collect();
                    writeln!(f, "\"{}\"", s.join(","))?;
                }
                p => writeln!(f, "{}", p.coordinate())?,
            }
        }
        Ok(())
    }
}

fn check_alpha(mode: EdgeMode, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("sparsity level {alpha} is outside (0, 1]")));
    }
    if mode == EdgeMode::Deterministic && alpha != 1.0 {
        return Err(Error::Domain("deterministic edges require alpha = 1".into()));
    }
    Ok(())
}

/// Draws `n` i.i.d. latents, then fills the upper triangle (diagonal included) row by row and mirrors it.
pub fn sample_graph(model: &GraphModel, n: usize, mode: EdgeMode, alpha: f64, rng: &mut Rng) -> Result<RandomGraph> {
    if n == 0 {
        return Err(Error::Domain("a graph needs at least one node".into()));
    }
    check_alpha(mode, alpha)?;
    let latents: Vec<Point> = (0..n).map(|_| model.dist.sample(rng)).collect();
    sample_edges(model, latents, mode, alpha, rng)
}

/// Edge sampling for given latents.
pub fn sample_edges(model: &GraphModel, latents: Vec<Point>, mode: EdgeMode, alpha: f64, rng: &mut Rng) -> Result<RandomGraph> {
    check_alpha(mode, alpha)?;
    for x in &latents {
        model.space.check(x)?;
    }
    let n = latents.len();
    let mut a = Array2::zeros((n, n));
    let hi = 1.0 / alpha;
    for i in 0..n {
        for j in i..n {
            let w = model.eval(&latents[i], &latents[j]);
            let v = match mode {
                EdgeMode::Deterministic => w,
                EdgeMode::Bernoulli => {
                    if rng.gen::<f64>() < alpha * w {
                        hi
                    } else {
                        0.0
                    }
                }
            };
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    Ok(RandomGraph { adjacency: a, latents, alpha, mode })
}

/// Power-iteration tolerance used by [`concentration_stat`].
pub const CONCENTRATION_TOL: f64 = 1e-4;

/// `‖A − W(X)‖ / n` in operator norm.
pub fn concentration_stat(g: &RandomGraph, model: &GraphModel) -> Result<f64> {
    let n = g.n();
    let mut diff = model.gram(&g.latents);
    diff.zip_mut_with(&g.adjacency, |w, a| *w = a - *w);
    Ok(linalg::operator_norm(diff.view(), CONCENTRATION_TOL)? / n as f64)
}
