mod common;

use common::*;
use graphlimit::bounds::{lemma_bound_check, lemma_lipschitz_check};
use graphlimit::experiments::counterexample::{prop4_csgnn, quartic, quartic_csgnn};
use graphlimit::gnn::{
    gnn_forward_equivariant, gnn_forward_invariant, identifier_signal, sgnn_forward, Activation, GnnParams, GnnSpec,
    IdentifierStrategy, Network, Readout,
};
use graphlimit::limit::{cgnn_forward, eta_function, mse_x, t_operator_apply, LatentFunction};
use graphlimit::linalg::operator_norm;
use graphlimit::models::{
    counterexample_model, degree_function, is_incoherent, kernel_eval, odd_moment_symmetry_test, Distribution,
    IntervalDensity, ModelSpec, Point,
};
use graphlimit::rng::seeded;
use graphlimit::sampler::{concentration_stat, sample_edges, sample_graph, EdgeMode};
use ndarray::Array2;
use rand::Rng as _;

fn gaussian(sigma: f64) -> graphlimit::models::GraphModel {
    ModelSpec::new("interval:-1,1", &format!("gaussian:sigma={sigma}"), "uniform").build().unwrap()
}

fn riemann(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / m as f64;
    (0..m).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn gaussian_kernel_closed_form() {
    let m = gaussian(0.3);
    let v = kernel_eval(&m, &Point::Real(0.0), &Point::Real(0.3)).unwrap();
    assert!((v - (-0.5f64).exp()).abs() < 1e-15);
}

#[test]
fn degree_function_matches_riemann_sum() {
    let m = gaussian(0.3);
    let d = degree_function(&m, &Point::Real(0.0)).unwrap();
    let oracle = riemann(-1.0, 1.0, 1_000_000, |y| 0.5 * (-y * y / (2.0 * 0.09)).exp());
    assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
}

#[test]
fn operator_on_identity_function_matches_riemann_sum() {
    let m = gaussian(0.5);
    let f = LatentFunction::from_fn(&m, 1, |p| vec![p.coordinate()]).unwrap();
    let tf = t_operator_apply(&m, &f).unwrap();
    for x in [0.0] {
        let v = tf.evaluate(&[Point::Real(x)]).unwrap()[[0, 0]];
        let oracle = riemann(-1.0, 1.0, 1_000_000, |y| 0.5 * y * (-(x - y) * (x - y) / 0.5).exp());
        assert!((v - oracle).abs() < 1e-6, "x={x}: {v} vs {oracle}");
    }
}

/// Brute force over all sign patterns in {-1,0,1}^K except 0.
fn incoherent_by_signs(p: &[f64]) -> bool {
    let k = p.len();
    let total = 3usize.pow(k as u32);
    for code in 1..total {
        let mut c = code;
        let mut s = 0.0;
        for &pk in p {
            s += (c % 3) as f64 * pk - pk;
            c /= 3;
        }
        let mut c = code;
        let all_zero = (0..k).all(|_| {
            let z = c % 3 == 1;
            c /= 3;
            z
        });
        if !all_zero && s.abs() < 1e-12 {
            return false;
        }
    }
    true
}

#[test]
fn random_simplex_points_are_incoherent() {
    let mut rng = seeded(11);
    for _ in 0..1000 {
        let e: Vec<f64> = (0..3).map(|_| -rng.gen::<f64>().ln()).collect();
        let s: f64 = e.iter().sum();
        let p: Vec<f64> = e.iter().map(|v| v / s).collect();
        assert!(incoherent_by_signs(&p));
        assert!(is_incoherent(&p).unwrap());
    }
    assert_eq!(is_incoherent(&[0.25, 0.25, 0.5]).unwrap(), incoherent_by_signs(&[0.25, 0.25, 0.5]));
    assert!(!is_incoherent(&[0.25, 0.25, 0.5]).unwrap());
}

#[test]
fn skewed_density_moments_match_quadrature() {
    let d = IntervalDensity::skewed().unwrap();
    let (moments, symmetric) = odd_moment_symmetry_test(&Distribution::Interval(d.clone()), 7).unwrap();
    let z = riemann(-1.0, 1.0, 1_000_000, |x| d.pdf(x));
    let m1 = riemann(-1.0, 1.0, 1_000_000, |x| x * d.pdf(x)) / z;
    let m3 = riemann(-1.0, 1.0, 1_000_000, |x| x.powi(3) * d.pdf(x)) / z;
    assert!(m1.abs() < 1e-6 && moments[0].abs() < 1e-6);
    assert!((moments[1] - m3).abs() < 1e-6, "{} vs {m3}", moments[1]);
    assert!(m3.abs() > 1e-3);
    assert!(!symmetric);
}

#[test]
fn narrow_density_first_moment() {
    let d = IntervalDensity::narrow(-1.0, 1.0, 0.5, 0.01).unwrap();
    let (moments, symmetric) = odd_moment_symmetry_test(&Distribution::Interval(d.clone()), 3).unwrap();
    let z = riemann(-1.0, 1.0, 1_000_000, |x| d.pdf(x));
    let m1 = riemann(-1.0, 1.0, 1_000_000, |x| x * d.pdf(x)) / z;
    assert!((moments[0] - m1).abs() < 1e-3 && (m1 - 0.5).abs() < 1e-3, "{} vs {m1}", moments[0]);
    assert!(!symmetric);
}

#[test]
fn bernoulli_edge_mean_is_the_kernel() {
    let m = ModelSpec::new("finite:2", "sbm:0.4,0.4;0.4,0.4", "finite:0.5,0.5").build().unwrap();
    let draws = 10_000;
    let mut rng = seeded(5);
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..draws {
        let g = sample_edges(&m, vec![Point::Class(0), Point::Class(1)], EdgeMode::Bernoulli, 0.5, &mut rng).unwrap();
        let v = g.adjacency[[0, 1]];
        sum += v;
        sq += v * v;
    }
    let mean = sum / draws as f64;
    let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    assert!((mean - 0.4).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn operator_norm_matches_eigendecomposition() {
    let mut rng = seeded(8);
    for _ in 0..5 {
        let mut m = Array2::<f64>::zeros((50, 50));
        for i in 0..50 {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        let d = nalgebra::DMatrix::from_fn(50, 50, |i, j| m[[i, j]]);
        let oracle = d.symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let v = operator_norm(m.view(), 1e-10).unwrap();
        assert!((v - oracle).abs() / oracle < 1e-5, "{v} vs {oracle}");
    }
}

#[test]
fn dense_concentration_stays_below_calibrated_level() {
    let m = gaussian(0.5);
    for seed in 0..20 {
        let g = sample_graph(&m, 400, EdgeMode::Bernoulli, 1.0, &mut seeded(seed)).unwrap();
        let s = concentration_stat(&g, &m).unwrap();
        assert!(s <= 5.0 / 20.0, "seed {seed}: {s}");
    }
}

fn random_input(n: usize, d: usize, rng: &mut graphlimit::rng::Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0))
}

#[test]
fn gnn_matches_loop_oracle() {
    let mut rng = seeded(21);
    let m = gaussian(0.5);
    let g = sample_graph(&m, 30, EdgeMode::Bernoulli, 0.5, &mut rng).unwrap();
    for (spec, act) in [
        (GnnSpec::new(&[2, 5, 4], 3, &[6, 3]), Activation::Relu),
        (GnnSpec::new(&[2, 3], 0, &[]), Activation::Tanh),
        (GnnSpec::new(&[2, 4, 4, 2], 2, &[]).with_square_head(), Activation::Relu),
    ] {
        let p = GnnParams::random(&spec.with_activation(act), 0.5, &mut rng).unwrap();
        let z = random_input(30, 2, &mut rng);
        let eq = gnn_forward_equivariant(&p, &g.adjacency, &z).unwrap();
        assert!(max_abs_diff(&eq, &naive_gnn(&p, &g.adjacency, &z, Readout::Equivariant)) < 1e-10);
        let inv = gnn_forward_invariant(&p, &g.adjacency, &z).unwrap();
        let oracle = naive_gnn(&p, &g.adjacency, &z, Readout::Invariant);
        assert!(max_abs_diff1(&inv, &oracle.row(0).to_owned()) < 1e-10);
    }
}

#[test]
fn sgnn_matches_loop_oracle() {
    let mut rng = seeded(22);
    let m = gaussian(0.5);
    let g = sample_graph(&m, 15, EdgeMode::Bernoulli, 0.7, &mut rng).unwrap();
    for strategy in IdentifierStrategy::ALL {
        let inner = GnnParams::random(&GnnSpec::new(&[1, 4, 3], 2, &[3]), 0.5, &mut rng).unwrap();
        let outer = GnnParams::random(&GnnSpec::new(&[3, 4], 1, &[2]), 0.5, &mut rng).unwrap();
        for readout in [Readout::Equivariant, Readout::Invariant] {
            let v = sgnn_forward(&inner, &outer, strategy, &g.adjacency, readout).unwrap();
            let oracle = naive_sgnn(&inner, &outer, strategy, &g.adjacency, readout);
            assert!(max_abs_diff(&v, &oracle) < 1e-10, "{strategy:?} {readout:?}");
        }
        for q in [0, 7, 14] {
            let e = identifier_signal(strategy, &g.adjacency, q).unwrap();
            assert!(max_abs_diff(&e, &naive_identifier(strategy, &g.adjacency, q)) < 1e-12);
        }
    }
}

#[test]
fn one_hot_identifier_distance_to_zero() {
    let m = gaussian(0.5);
    let g = sample_graph(&m, 100, EdgeMode::Deterministic, 1.0, &mut seeded(1)).unwrap();
    let e = identifier_signal(IdentifierStrategy::OneHot, &g.adjacency, 3).unwrap();
    let zero = LatentFunction::constant(&m, 0.0, 1);
    assert!((mse_x(&e, &zero, &g.latents).unwrap() - 0.1).abs() < 1e-15);
}

#[test]
fn finite_cgnn_matches_matrix_recursion() {
    let model = ModelSpec::new("finite:3", "sbm:0.9,0.2,0.1;0.2,0.5,0.3;0.1,0.3,0.7", "finite:0.2,0.3,0.5").build().unwrap();
    let w = [[0.9, 0.2, 0.1], [0.2, 0.5, 0.3], [0.1, 0.3, 0.7]];
    let p = [0.2, 0.3, 0.5];
    let s: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| w[i][j] * p[j]).collect()).collect();
    let mut rng = seeded(4);
    for _ in 0..10 {
        let params = GnnParams::random(&GnnSpec::new(&[1, 6, 5], 3, &[4, 2]), 0.5, &mut rng).unwrap();
        let f0 = LatentFunction::constant(&model, 1.0, 1);
        let out = cgnn_forward(&params, &model, &f0, Readout::Equivariant).unwrap().function().unwrap();
        let oracle = naive_gnn_with(&params, &s, &p, &Array2::ones((3, 1)), Readout::Equivariant);
        assert!(max_abs_diff(&out.values, &oracle) < 1e-12);
        let inv = cgnn_forward(&params, &model, &f0, Readout::Invariant).unwrap().vector().unwrap();
        let oracle = naive_gnn_with(&params, &s, &p, &Array2::ones((3, 1)), Readout::Invariant);
        assert!(max_abs_diff1(&inv, &oracle.row(0).to_owned()) < 1e-12);
    }
}

#[test]
fn two_hop_eta_on_the_counterexample() {
    let m = counterexample_model(0.5).unwrap();
    let eta = eta_function(&m, IdentifierStrategy::TwoHop).unwrap();
    assert!((eta.values[[0, 0]] - 1.0 / 8.0).abs() < 1e-15);
    assert!((eta.values[[1, 1]] - 11.0 / 96.0).abs() < 1e-15);
}

#[test]
fn quartic_values_match_brute_force() {
    for i in 0..=10 {
        let g = i as f64 / 10.0;
        let off = (1.0 - g) / 2.0;
        let oracle = two_class_quartic([[g, off], [off, (1.0 + g) / 4.0]], [1.0 / 3.0, 2.0 / 3.0]);
        let v = quartic_csgnn(g).unwrap();
        assert!((v - oracle).abs() < 1e-12, "gamma {g}: {v} vs {oracle}");
        assert!((quartic(g) - oracle).abs() < 1e-12);
    }
    assert!((quartic_csgnn(0.0).unwrap() - 17.0 / 1296.0).abs() < 1e-12);
    assert!((quartic_csgnn(1.0).unwrap() - 2.0 / 81.0).abs() < 1e-12);
}

#[test]
fn equivariant_counterexample_values() {
    let m = counterexample_model(0.5).unwrap();
    let v = prop4_csgnn(&m).unwrap();
    assert!((v[0] - 1.0 / 8.0).abs() < 1e-12 && (v[1] - 11.0 / 96.0).abs() < 1e-12);
}

#[test]
fn lemma_bounds_hold_on_finite_and_grid_models() {
    let mut rng = seeded(31);
    let finite = counterexample_model(0.3).unwrap();
    let grid = gaussian(0.5).with_resolution(64);
    for model in [&finite, &grid] {
        for _ in 0..20 {
            let p = GnnParams::random(&GnnSpec::new(&[1, 5, 5, 4], 2, &[3]), 0.5, &mut rng).unwrap();
            let f0 = LatentFunction::constant(model, 1.0, 1);
            let layers = lemma_bound_check(&p, model, &f0).unwrap();
            assert!(layers.iter().all(|l| l.sup_ratio() <= 1.0 && l.l2_ratio() <= 1.0));
        }
    }
    for _ in 0..5 {
        let p = GnnParams::random(&GnnSpec::new(&[1, 4, 4], 2, &[]), 0.3, &mut rng).unwrap();
        let f0 = LatentFunction::from_fn(&grid, 1, |x| vec![x.coordinate().cos()]).unwrap();
        assert!(lemma_lipschitz_check(&p, &grid, &f0).unwrap() <= 1.0);
    }
}

#[test]
fn network_output_on_an_isomorphic_copy() {
    let mut rng = seeded(9);
    let m = gaussian(0.5);
    let g = sample_graph(&m, 20, EdgeMode::Bernoulli, 0.6, &mut rng).unwrap();
    let perm = random_permutation(20, &mut rng);
    let b = permute_adjacency(&g.adjacency, &perm);
    let inner = GnnParams::random(&GnnSpec::new(&[1, 3], 1, &[2]), 0.5, &mut rng).unwrap();
    let outer = GnnParams::random(&GnnSpec::new(&[2, 3], 2, &[1]), 0.5, &mut rng).unwrap();
    let net = Network::Sgnn { inner, outer, strategy: IdentifierStrategy::TwoHop };
    let x = net.discrete(&g.adjacency, None, Readout::Invariant).unwrap();
    let y = net.discrete(&b, None, Readout::Invariant).unwrap();
    assert!(max_abs_diff(&x, &y) < 1e-10);
}
