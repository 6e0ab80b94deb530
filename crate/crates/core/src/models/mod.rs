//! Latent spaces, kernels, distributions and the `(W, P)` graph model.

mod density;
mod parse;
mod structure;

pub use density::{DensityShape, IntervalDensity, DEFAULT_GRID_NODES};
pub use parse::{counterexample_spec, parse_distribution, parse_kernel, parse_model, parse_space, ModelSpec};
pub use structure::{counterexample_model, degree_function, is_incoherent, odd_moment_symmetry_test, INCOHERENCE_MAX_K};

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Default number of Monte-Carlo points for sphere integrals.
pub const DEFAULT_SPHERE_POINTS: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub enum LatentSpace {
    /// Classes `0..k` with the discrete metric.
    Finite { k: usize },
    Interval { a: f64, b: f64 },
    /// Unit sphere in `R^d`.
    Sphere { d: usize },
}

impl LatentSpace {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LatentSpace::Finite { k } if k == 0 => Err(Error::Domain("finite space needs K >= 1".into())),
            LatentSpace::Interval { a, b } if !(a < b) || !a.is_finite() || !b.is_finite() => {
                Err(Error::Domain(format!("interval [{a}, {b}] is empty or unbounded")))
            }
            LatentSpace::Sphere { d } if d < 2 => Err(Error::Domain("sphere needs d >= 2".into())),
            _ => Ok(()),
        }
    }

    /// Diameter `D_X`.
    pub fn diameter(&self) -> f64 {
        match *self {
            LatentSpace::Finite { .. } => 1.0,
            LatentSpace::Interval { a, b } => b - a,
            LatentSpace::Sphere { .. } => 2.0,
        }
    }

    /// Covering dimension `d_X`.
    pub fn covering_dimension(&self) -> f64 {
        match *self {
            LatentSpace::Finite { .. } => 0.0,
            LatentSpace::Interval { .. } => 1.0,
            LatentSpace::Sphere { d } => (d - 1) as f64,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match (self, x) {
            (LatentSpace::Finite { k }, Point::Class(c)) => c < k,
            (LatentSpace::Interval { a, b }, Point::Real(t)) => *a <= *t && *t <= *b,
            (LatentSpace::Sphere { d }, Point::Sphere(v)) => {
                v.len() == *d && (v.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-9
            }
            _ => false,
        }
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {x:?} is not in {self:?}")))
        }
    }

    /// Metric `m(x, y)`: discrete, absolute difference or chordal.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match (x, y) {
            (Point::Class(i), Point::Class(j)) => (i != j) as u8 as f64,
            (Point::Real(s), Point::Real(t)) => (s - t).abs(),
            (Point::Sphere(u), Point::Sphere(v)) => euclid(u, v),
            _ => f64::NAN,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            LatentSpace::Finite { .. } => "finite",
            LatentSpace::Interval { .. } => "interval",
            LatentSpace::Sphere { .. } => "sphere",
        }
    }
}

/// A latent position.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// Zero-based class index.
    Class(usize),
    Real(f64),
    Sphere(Vec<f64>),
}

impl Point {
    /// Scalar coordinate used in CSV dumps (class index, real value, or first coordinate).
    pub fn coordinate(&self) -> f64 {
        match self {
            Point::Class(c) => *c as f64,
            Point::Real(t) => *t,
            Point::Sphere(v) => v[0],
        }
    }
}

fn euclid(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// `exp(−r²/(2σ²))`
    Gaussian { sigma: f64 },
    /// `exp(−r/s)`
    Laplace { scale: f64 },
    /// `max(0, 1 − r/w)`
    Triangle { width: f64 },
    Constant { c: f64 },
}

impl RadialProfile {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Gaussian { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            RadialProfile::Laplace { scale } => (-r / scale).exp(),
            RadialProfile::Triangle { width } => (1.0 - r / width).max(0.0),
            RadialProfile::Constant { c } => c,
        }
    }

    fn lipschitz(&self) -> f64 {
        match *self {
            RadialProfile::Gaussian { sigma } => (-0.5f64).exp() / sigma,
            RadialProfile::Laplace { scale } => 1.0 / scale,
            RadialProfile::Triangle { width } => 1.0 / width,
            RadialProfile::Constant { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialProfile::Gaussian { sigma } => sigma > 0.0,
            RadialProfile::Laplace { scale } => scale > 0.0,
            RadialProfile::Triangle { width } => width > 0.0,
            RadialProfile::Constant { c } => (0.0..=1.0).contains(&c),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid radial profile {self:?}")))
        }
    }
}

/// Inner map `v` of an additive kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdditiveInner {
    Identity,
    Tanh,
    Cube,
}

impl AdditiveInner {
    fn eval(&self, t: f64) -> f64 {
        match self {
            AdditiveInner::Identity => t,
            AdditiveInner::Tanh => t.tanh(),
            AdditiveInner::Cube => t * t * t,
        }
    }

    fn max_slope(&self, a: f64, b: f64) -> f64 {
        match self {
            AdditiveInner::Identity | AdditiveInner::Tanh => 1.0,
            AdditiveInner::Cube => 3.0 * a.abs().max(b.abs()).powi(2),
        }
    }
}

/// Profile `w` of a dot-product kernel `w(xᵀy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DotProfile {
    /// `exp(β(t − 1))`
    Exp { beta: f64 },
    /// `(1 + t)/2`
    Affine,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    /// Symmetric `K×K` connectivity matrix.
    Sbm { w: Array2<f64> },
    /// Radial kernel `w(|x − y|)`; `gaussian:sigma=…` is the Gaussian profile.
    Radial(RadialProfile),
    /// `u(v(x) + v(y))` with logistic `u(t) = 1/(1 + e^{−s t})`.
    Additive { scale: f64, inner: AdditiveInner },
    DotProduct(DotProfile),
}

impl Kernel {
    pub fn gaussian(sigma: f64) -> Self {
        Kernel::Radial(RadialProfile::Gaussian { sigma })
    }

    pub fn constant(c: f64) -> Self {
        Kernel::Radial(RadialProfile::Constant { c })
    }

    /// Evaluates `W(x, y)` without checking that the points belong to the space.
    #[inline]
    pub fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (Kernel::Sbm { w }, Point::Class(i), Point::Class(j)) => w[[*i, *j]],
            (Kernel::Radial(p), Point::Real(s), Point::Real(t)) => p.eval((s - t).abs()),
            (Kernel::Radial(p), Point::Sphere(u), Point::Sphere(v)) => p.eval(euclid(u, v)),
            (Kernel::Additive { scale, inner }, Point::Real(s), Point::Real(t)) => {
                1.0 / (1.0 + (-scale * (inner.eval(*s) + inner.eval(*t))).exp())
            }
            (Kernel::DotProduct(p), Point::Sphere(u), Point::Sphere(v)) => {
                let t = dot(u, v).clamp(-1.0, 1.0);
                match *p {
                    DotProfile::Exp { beta } => (beta * (t - 1.0)).exp(),
                    DotProfile::Affine => 0.5 * (1.0 + t),
                }
            }
            _ => f64::NAN,
        }
    }

    /// Declared Lipschitz constant `L_W` in each argument, relative to the space's metric.
    pub fn lipschitz(&self, space: &LatentSpace) -> f64 {
        match self {
            Kernel::Sbm { w } => {
                let k = w.nrows();
                let mut l: f64 = 0.0;
                for i in 0..k {
                    for i2 in 0..k {
                        for j in 0..k {
                            l = l.max((w[[i, j]] - w[[i2, j]]).abs());
                        }
                    }
                }
                l
            }
            Kernel::Radial(p) => p.lipschitz(),
            Kernel::Additive { scale, inner } => {
                let (a, b) = match *space {
                    LatentSpace::Interval { a, b } => (a, b),
                    _ => (1.0, 1.0),
                };
                0.25 * scale.abs() * inner.max_slope(a, b)
            }
            Kernel::DotProduct(DotProfile::Exp { beta }) => beta.abs(),
            Kernel::DotProduct(DotProfile::Affine) => 0.5,
        }
    }

    /// Space kinds this kernel is defined on.
    fn supports(&self, space: &LatentSpace) -> bool {
        match (self, space) {
            (Kernel::Sbm { w }, LatentSpace::Finite { k }) => w.nrows() == *k && w.ncols() == *k,
            (Kernel::Radial(_), LatentSpace::Interval { .. } | LatentSpace::Sphere { .. }) => true,
            (Kernel::Additive { .. }, LatentSpace::Interval { .. }) => true,
            (Kernel::DotProduct(_), LatentSpace::Sphere { .. }) => true,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Sbm { w } => {
                if w.nrows() != w.ncols() {
                    return Err(Error::Domain("SBM matrix must be square".into()));
                }
                for ((i, j), &v) in w.indexed_iter() {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Domain(format!("SBM entry ({i},{j}) = {v} is outside [0, 1]")));
                    }
                    if v != w[[j, i]] {
                        return Err(Error::Domain(format!("SBM matrix is not symmetric at ({i},{j})")));
                    }
                }
                Ok(())
            }
            Kernel::Radial(p) => p.validate(),
            Kernel::Additive { scale, .. } if !scale.is_finite() => Err(Error::Domain("additive scale must be finite".into())),
            Kernel::DotProduct(DotProfile::Exp { beta }) if !(*beta >= 0.0) => {
                Err(Error::Domain("dot-product exp profile needs beta >= 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// `W(x, y)` with membership checks on both points.
pub fn kernel_eval(model: &GraphModel, x: &Point, y: &Point) -> Result<f64> {
    model.space.check(x)?;
    model.space.check(y)?;
    Ok(model.kernel.eval_unchecked(x, y))
}

#[derive(Clone, Debug)]
pub enum Distribution {
    Finite { p: Vec<f64> },
    Interval(IntervalDensity),
    SphereUniform { d: usize, points: usize, seed: u64 },
}

impl Distribution {
    pub fn finite(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Domain("finite distribution needs nonnegative entries".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("finite distribution sums to {s}, not 1")));
        }
        Ok(Distribution::Finite { p })
    }

    pub fn sphere_uniform(d: usize) -> Self {
        Distribution::SphereUniform { d, points: DEFAULT_SPHERE_POINTS, seed: 0x5_9A_E5E }
    }

    fn supports(&self, space: &LatentSpace) -> bool {
        match (self, space) {
            (Distribution::Finite { p }, LatentSpace::Finite { k }) => p.len() == *k,
            (Distribution::Interval(d), LatentSpace::Interval { a, b }) => {
                let (lo, hi) = d.bounds();
                (lo - a).abs() < 1e-12 && (hi - b).abs() < 1e-12
            }
            (Distribution::SphereUniform { d, .. }, LatentSpace::Sphere { d: e }) => d == e,
            _ => false,
        }
    }

    /// One draw from the distribution.
    pub fn sample(&self, rng: &mut Rng) -> Point {
        match self {
            Distribution::Finite { p } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (i, &pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        return Point::Class(i);
                    }
                }
                Point::Class(p.iter().rposition(|&v| v > 0.0).unwrap_or(p.len() - 1))
            }
            Distribution::Interval(d) => Point::Real(d.inverse_cdf(rng.gen())),
            Distribution::SphereUniform { d, .. } => Point::Sphere(sphere_draw(*d, rng)),
        }
    }

    /// Integration nodes and weights: exact atoms for finite spaces,
    /// the density grid for intervals, seeded Monte-Carlo points on spheres.
    pub fn quadrature(&self) -> (Vec<Point>, Vec<f64>) {
        match self {
            Distribution::Finite { p } => ((0..p.len()).map(Point::Class).collect(), p.clone()),
            Distribution::Interval(d) => (d.nodes().iter().map(|&x| Point::Real(x)).collect(), d.weights().to_vec()),
            Distribution::SphereUniform { d, points, seed } => {
                let mut rng = crate::rng::seeded(*seed);
                let pts = (0..*points).map(|_| Point::Sphere(sphere_draw(*d, &mut rng))).collect();
                (pts, vec![1.0 / *points as f64; *points])
            }
        }
    }

    /// Same distribution with a finer or coarser integration rule.
    pub fn with_resolution(&self, nodes: usize) -> Self {
        match self {
            Distribution::Finite { .. } => self.clone(),
            Distribution::Interval(d) => Distribution::Interval(d.with_grid(nodes)),
            Distribution::SphereUniform { d, seed, .. } => Distribution::SphereUniform { d: *d, points: nodes, seed: *seed },
        }
    }
}

fn sphere_draw(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1e-12 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// The pair `(W, P)` over a latent space.
#[derive(Clone, Debug)]
pub struct GraphModel {
    pub space: LatentSpace,
    pub kernel: Kernel,
    pub dist: Distribution,
}

impl GraphModel {
    pub fn new(space: LatentSpace, kernel: Kernel, dist: Distribution) -> Result<Self> {
        space.validate()?;
        kernel.validate()?;
        if !kernel.supports(&space) {
            return Err(Error::Domain(format!("kernel {kernel:?} is not defined on a {} space", space.kind())));
        }
        if !dist.supports(&space) {
            return Err(Error::Domain(format!("distribution does not match the {} space {space:?}", space.kind())));
        }
        Ok(GraphModel { space, kernel, dist })
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        self.kernel.eval_unchecked(x, y)
    }

    pub fn lipschitz(&self) -> f64 {
        self.kernel.lipschitz(&self.space)
    }

    /// `(W(x_i, y_j))_{ij}`.
    pub fn kernel_matrix(&self, xs: &[Point], ys: &[Point]) -> Array2<f64> {
        Array2::from_shape_fn((xs.len(), ys.len()), |(i, j)| self.kernel.eval_unchecked(&xs[i], &ys[j]))
    }

    /// Symmetric `(W(x_i, x_j))_{ij}`, filled on the upper triangle and mirrored.
    pub fn gram(&self, xs: &[Point]) -> Array2<f64> {
        let n = xs.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.kernel.eval_unchecked(&xs[i], &xs[j]);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        m
    }

    /// Same model with the integration rule rebuilt at `nodes` points.
    pub fn with_resolution(&self, nodes: usize) -> Self {
        GraphModel { dist: self.dist.with_resolution(nodes), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_model() -> GraphModel {
        GraphModel::new(
            LatentSpace::Interval { a: -1.0, b: 1.0 },
            Kernel::gaussian(0.3),
            Distribution::Interval(IntervalDensity::uniform(-1.0, 1.0).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_values() {
        let m = gaussian_model();
        assert_eq!(kernel_eval(&m, &Point::Real(0.2), &Point::Real(0.2)).unwrap(), 1.0);
        let v = kernel_eval(&m, &Point::Real(0.0), &Point::Real(0.3)).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn points_outside_the_space_are_rejected() {
        let m = gaussian_model();
        assert!(matches!(kernel_eval(&m, &Point::Real(1.5), &Point::Real(0.0)), Err(Error::Domain(_))));
        assert!(kernel_eval(&m, &Point::Class(0), &Point::Real(0.0)).is_err());
        let c = counterexample_model(0.5).unwrap();
        assert!(kernel_eval(&c, &Point::Class(2), &Point::Class(0)).is_err());
    }

    #[test]
    fn mismatched_components_are_rejected() {
        let r = GraphModel::new(LatentSpace::Finite { k: 2 }, Kernel::gaussian(0.3), Distribution::finite(vec![0.5, 0.5]).unwrap());
        assert!(r.is_err());
        let r = GraphModel::new(
            LatentSpace::Interval { a: 0.0, b: 1.0 },
            Kernel::gaussian(0.3),
            Distribution::Interval(IntervalDensity::uniform(-1.0, 1.0).unwrap()),
        );
        assert!(r.is_err());
        assert!(Distribution::finite(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn space_metadata() {
        assert_eq!(LatentSpace::Finite { k: 3 }.diameter(), 1.0);
        assert_eq!(LatentSpace::Finite { k: 3 }.covering_dimension(), 0.0);
        assert_eq!(LatentSpace::Interval { a: -1.0, b: 1.0 }.diameter(), 2.0);
        assert_eq!(LatentSpace::Sphere { d: 3 }.covering_dimension(), 2.0);
    }

    #[test]
    fn sphere_draws_are_unit_vectors() {
        let d = Distribution::sphere_uniform(4);
        let mut rng = crate::rng::seeded(3);
        for _ in 0..100 {
            let p = d.sample(&mut rng);
            assert!(LatentSpace::Sphere { d: 4 }.contains(&p));
        }
    }
}
