//! Gauss–Legendre rules and composite panels on an interval.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `order` Gauss points on each panel `[edges[i], edges[i+1]]`.
pub fn composite(edges: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (ref_nodes, ref_weights) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * order);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

/// `panels + 1` uniform edges on `[a, b]`, each interior breakpoint snapped
/// onto the nearest edge so that no panel straddles a kink.
pub fn panel_edges(a: f64, b: f64, panels: usize, breakpoints: &[f64]) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    let mut edges: Vec<f64> = (0..=panels).map(|i| a + h * i as f64).collect();
    edges[panels] = b;
    for &bp in breakpoints {
        if bp <= a || bp >= b || panels < 2 {
            continue;
        }
        let idx = ((bp - a) / h).round() as usize;
        let idx = idx.clamp(1, panels - 1);
        edges[idx] = bp;
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();
    edges
}
