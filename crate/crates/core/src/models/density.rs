//! Piecewise-linear densities on an interval: exact inverse-CDF sampling and
//! density-weighted composite Gauss–Legendre grids.

use crate::error::{Error, Result};
use crate::quadrature;

pub const DEFAULT_GRID_NODES: usize = 512;
const PANEL_ORDER: usize = 16;

/// Named shape of an interval density, kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityShape {
    Uniform,
    /// Arbitrary piecewise-linear profile (normalised on construction).
    Piecewise,
    /// Triangular bump of half-width `width` around `center`.
    Narrow { center: f64, width: f64 },
    /// Centered, non-symmetric piecewise-linear profile on `[-1, 1]`.
    Skewed,
}

/// A continuous density on `[a, b]` that is linear between knots.
#[derive(Clone, Debug)]
pub struct IntervalDensity {
    pub shape: DensityShape,
    a: f64,
    b: f64,
    knots: Vec<(f64, f64)>,
    /// Cumulative mass at each knot.
    cum: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl IntervalDensity {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let h = 1.0 / (b - a);
        Self::from_knots(DensityShape::Uniform, vec![(a, h), (b, h)])
    }

    /// Triangular bump; the support `[center − width, center + width]` must lie in `[a, b]`.
    pub fn narrow(a: f64, b: f64, center: f64, width: f64) -> Result<Self> {
        if width <= 0.0 || center - width < a || center + width > b {
            return Err(Error::Domain(format!(
                "narrow density at {center} with width {width} does not fit in [{a}, {b}]"
            )));
        }
        let mut knots = vec![];
        if center - width > a {
            knots.push((a, 0.0));
        }
        knots.push((center - width, 0.0));
        knots.push((center, 1.0 / width));
        knots.push((center + width, 0.0));
        if center + width < b {
            knots.push((b, 0.0));
        }
        Self::from_knots(DensityShape::Narrow { center, width }, knots)
    }

    /// Mean-zero, non-symmetric density on `[-1, 1]`: one half plus an odd
    /// piecewise-linear perturbation whose first moment vanishes.
    pub fn skewed() -> Result<Self> {
        let knots = vec![(-1.0, 0.98), (-0.5, 0.1), (0.0, 0.5), (0.5, 0.9), (1.0, 0.02)];
        Self::from_knots(DensityShape::Skewed, knots)
    }

    /// Builds from `(x, value)` knots covering the interval; values are
    /// rescaled to unit mass.
    pub fn from_knots(shape: DensityShape, mut knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_knots_with_grid(shape, std::mem::take(&mut knots), DEFAULT_GRID_NODES)
    }

    pub fn from_knots_with_grid(shape: DensityShape, knots: Vec<(f64, f64)>, grid_nodes: usize) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Domain("a piecewise density needs at least two knots".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("density knots must be strictly increasing".into()));
        }
        if knots.iter().any(|&(_, y)| !(y >= 0.0) || !y.is_finite()) {
            return Err(Error::Domain("density values must be finite and nonnegative".into()));
        }
        let mass: f64 = knots.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        if mass <= 0.0 {
            return Err(Error::Domain("density has zero mass".into()));
        }
        let knots: Vec<(f64, f64)> = knots.into_iter().map(|(x, y)| (x, y / mass)).collect();
        let mut cum = vec![0.0];
        for w in knots.windows(2) {
            let seg = 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
            cum.push(cum.last().unwrap() + seg);
        }
        let a = knots[0].0;
        let b = knots[knots.len() - 1].0;
        let mut d = IntervalDensity { shape, a, b, knots, cum, nodes: vec![], weights: vec![] };
        d.build_grid(grid_nodes);
        Ok(d)
    }

    /// Rebuilds the quadrature grid with (at least) `grid_nodes` nodes.
    pub fn with_grid(&self, grid_nodes: usize) -> Self {
        let mut d = self.clone();
        d.build_grid(grid_nodes);
        d
    }

    fn build_grid(&mut self, grid_nodes: usize) {
        let panels = grid_nodes.div_ceil(PANEL_ORDER).max(1);
        let interior: Vec<f64> = self.knots[1..self.knots.len() - 1].iter().map(|k| k.0).collect();
        let edges = quadrature::panel_edges(self.a, self.b, panels, &interior);
        let (nodes, gl) = quadrature::composite(&edges, PANEL_ORDER);
        let mut weights: Vec<f64> = nodes.iter().zip(&gl).map(|(&x, &w)| w * self.pdf(x)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        self.nodes = nodes;
        self.weights = weights;
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let i = self.segment_of(x);
        let (x0, y0) = self.knots[i];
        let (x1, y1) = self.knots[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn segment_of(&self, x: f64) -> usize {
        let k = self.knots.partition_point(|&(kx, _)| kx <= x);
        k.saturating_sub(1).min(self.knots.len() - 2)
    }

    /// Exact inverse of the (piecewise-quadratic) CDF.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let total = *self.cum.last().unwrap();
        let target = u * total;
        let mut i = self.cum.partition_point(|&c| c <= target).saturating_sub(1);
        i = i.min(self.knots.len() - 2);
        // skip zero-mass segments
        while i + 1 < self.knots.len() - 1 && self.cum[i + 1] - self.cum[i] <= 0.0 {
            i += 1;
        }
        let (x0, y0) = self.knots[i];
        let (x1, y1) = self.knots[i + 1];
        let h = x1 - x0;
        let rem = (target - self.cum[i]).max(0.0);
        let slope = (y1 - y0) / h;
        // solve y0 s + slope s²/2 = rem for s in [0, h]
        let disc = (y0 * y0 + 2.0 * slope * rem).max(0.0);
        let denom = y0 + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        (x0 + s.clamp(0.0, h)).clamp(self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ g dP` with the quadrature grid.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}
