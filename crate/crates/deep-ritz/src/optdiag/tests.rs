use super::*;
use crate::approxnet::assemble_approximant;
use crate::energy::{manufacture, BoxDomain, Field, ProblemConfig};
use crate::netcore::{Layer, SubNetwork};
use crate::rng::SplitRng;

fn uniform_vecs(rng: &mut SplitRng, count: usize, dim: usize, b: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.uniform_range(-b, b)).collect()).collect()
}

#[test]
fn exact_targets_match_in_order() {
    let mut rng = SplitRng::new(1);
    let init = uniform_vecs(&mut rng, 10, 6, 1.0);
    let targets: Vec<Vec<f64>> = init[..4].to_vec();
    let rep = match_initialization(&init, &targets, 1, 0.0).unwrap();
    assert!(rep.success);
    assert_eq!(rep.indices, vec![vec![0], vec![1], vec![2], vec![3]]);
}

#[test]
fn far_targets_fall_back() {
    let mut rng = SplitRng::new(2);
    let init = uniform_vecs(&mut rng, 12, 4, 1.0);
    let targets = vec![vec![5.0; 4], vec![-5.0; 4]];
    let rep = match_initialization(&init, &targets, 3, 0.1).unwrap();
    assert!(!rep.success);
    assert_eq!(rep.indices, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    assert!(match_initialization(&init, &targets, 7, 0.1).is_err());
    assert!(match_initialization(&init, &[vec![0.0; 3]], 1, 0.1).is_err());
}

#[test]
fn matches_are_distinct_and_within_delta() {
    let mut rng = SplitRng::new(3);
    let init = uniform_vecs(&mut rng, 400, 2, 1.0);
    let targets = uniform_vecs(&mut rng, 5, 2, 0.5);
    let rep = match_initialization(&init, &targets, 3, 0.4).unwrap();
    assert!(rep.success);
    let mut all: Vec<usize> = rep.indices.iter().flatten().copied().collect();
    for (k, row) in rep.indices.iter().enumerate() {
        for &i in row {
            assert!(sup_dist(&init[i], &targets[k]) <= 0.4);
        }
    }
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), 15);
}

#[test]
fn matching_follows_a_permutation_of_the_init() {
    // Each target has exactly one candidate, so the matched sets are order-free.
    let init: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, -(i as f64)]).collect();
    let targets = vec![vec![2.0, -2.0], vec![5.0, -5.0], vec![7.0, -7.0]];
    let perm = [3, 7, 0, 5, 1, 6, 2, 4];
    let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| init[p].clone()).collect();
    let a = match_initialization(&init, &targets, 1, 0.1).unwrap();
    let b = match_initialization(&permuted, &targets, 1, 0.1).unwrap();
    for (ra, rb) in a.indices.iter().zip(&b.indices) {
        assert_eq!(ra[0], perm[rb[0]]);
    }
}

#[test]
fn single_target_success_rate_matches_binomial() {
    // A corner target makes the per-weight match probability exactly δ/(2B).
    let (b, delta, dim, m, trials) = (1.0, 0.6, 2, 10, 500);
    let q: f64 = delta / (2.0 * b);
    let p = 1.0 - (1.0 - q.powi(dim as i32)).powi(m as i32);
    let target = vec![vec![b; dim]];
    let mut rng = SplitRng::new(4);
    let mut hits = 0;
    for _ in 0..trials {
        let init = uniform_vecs(&mut rng, m, dim, b);
        if match_initialization(&init, &target, 1, delta).unwrap().success {
            hits += 1;
        }
    }
    let freq = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((freq - p).abs() <= 4.0 * sigma, "{freq} vs {p}");
}

#[test]
fn probability_bound_edges_and_monotonicity() {
    assert_eq!(event_probability_bound(3, 2, 5, 2.0, 1.0, 2, 2).unwrap(), 1.0);
    let mut last = 0.0;
    for q in [1, 10, 100, 1_000, 10_000, 100_000] {
        let v = event_probability_bound(1, 1, q, 0.5, 1.0, 1, 1).unwrap();
        assert!(v >= last && (0.0..=1.0).contains(&v));
        last = v;
    }
    assert!(last > 0.999);
    // Exponent W(W+1)L = 2 for W = L = 1.
    let v = event_probability_bound(1, 1, 3, 0.5, 1.0, 1, 1).unwrap();
    assert!((v - (1.0 - (1.0f64 - 0.0625).powi(3))).abs() < 1e-15);
    assert_eq!(event_probability_bound(50, 50, 1, 0.1, 1.0, 4, 3).unwrap(), 0.0);
    assert!(event_probability_bound(1, 1, 1, 3.0, 1.0, 1, 1).is_err());
    assert!(event_probability_bound(1, 1, 0, 1.0, 1.0, 1, 1).is_err());
}

#[test]
fn transition_copies_coefficients_for_single_matches() {
    let shape = NetShape::new(6, 3, 2, 1).unwrap();
    let init = crate::netcore::random_uniform(shape, 1.0, &mut SplitRng::new(5));
    let rep = MatchReport { indices: vec![vec![4], vec![1]], delta_used: 0.0, success: true };
    let t = build_transition_network(&init, &rep, &[0.7, -1.25], 1).unwrap();
    assert_eq!(t.net.coefficients(), &[0.0, -1.25, 0.0, 0.0, 0.7, 0.0]);
    assert_eq!(t.net.subnets(), init.subnets());
    assert_eq!(t.l1, 1.95);
    let failed = MatchReport { success: false, ..rep };
    assert!(build_transition_network(&init, &failed, &[0.7, -1.25], 1).is_err());
}

#[test]
fn transition_norms_on_random_constructions() {
    let mut rng = SplitRng::new(6);
    for _ in 0..200 {
        let m_bar = 1 + rng.below(6) as usize;
        let r = 1 + rng.below(5) as usize;
        let cbar: Vec<f64> = (0..m_bar).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
        let shape = NetShape::new(m_bar * r + 2, 2, 2, 1).unwrap();
        let init = ParallelNetwork::zeros(shape);
        let rep =
            MatchReport { indices: (0..m_bar).map(|k| (0..r).map(|v| k * r + v).collect()).collect(), delta_used: 0.0, success: true };
        let t = build_transition_network(&init, &rep, &cbar, r).unwrap();
        let total: f64 = cbar.iter().map(|c| c.abs()).sum();
        assert!((t.l1 - total).abs() <= 1e-14 * total);
        assert!(t.l2 * (r as f64).sqrt() <= t.l1 * (1.0 + 1e-14));
    }
}

fn constant_net(c: f64) -> ParallelNetwork {
    let hidden = Layer::zeros(2, 1);
    let out = Layer::new(1, 2, vec![0.0, 0.0], vec![c]).unwrap();
    ParallelNetwork::new(vec![SubNetwork::new(vec![hidden, out], 2).unwrap()], vec![1.0]).unwrap()
}

#[test]
fn decomposition_vanishes_for_exact_representation() {
    let problem = manufacture(Field::constant(1.0), Field::constant(1.0), BoxDomain::unit(1)).unwrap();
    let samples = SampleSet::draw(&problem, 64, 16, 1).unwrap();
    let u = constant_net(1.0);
    let quad = QuadratureSpec::gauss(16);
    let rep = error_decomposition(&u, &u, &problem, &samples, StaTerm::Bound(0.0), &quad).unwrap();
    assert_eq!(rep.e_opt_minus, 0.0);
    assert!(rep.e_app < 1e-28);
    assert!(rep.total_bound < 1e-27);
}

#[test]
fn decomposition_bounds_measured_error_on_a_short_run() {
    let problem = ProblemConfig::cosine(1).build().unwrap();
    let quad = QuadratureSpec::gauss(32);
    let samples = SampleSet::draw(&problem, 512, 512, 2).unwrap();
    let shape = NetShape::new(16, 4, 3, 1).unwrap();
    let config = PgdConfig::new(1.0, 10.0, 10.0, 2e-3, 300, 3);
    let state = crate::pgd::train(&problem, shape, &config, &samples).unwrap();
    let u_a = state.network();
    let u_bar = assemble_approximant(problem.exact_solution().unwrap(), 0.2, 3, 1, 2.0).unwrap().net;
    let sta = measured_sta(u_a, &u_bar, &problem, &samples, &quad).unwrap();
    let rep = error_decomposition(u_a, &u_bar, &problem, &samples, sta, &quad).unwrap();
    assert!(rep.h1_sq_measured <= rep.total_bound + 1e-9, "{rep:?}");
    assert!(matches!(rep.e_sta, StaTerm::Measured(_)));

    let ens = erm_ensemble_min(&problem, &samples, shape, &PgdConfig { iterations: 100, ..config.clone() }, 2, &[&u_bar]).unwrap();
    let lhat_a = empirical_energy(u_a, &samples, &problem).unwrap();
    assert!(rep.e_opt_minus <= lhat_a - ens + 1e-12);
}

#[test]
fn decomposition_requires_exact_solution() {
    let problem = ProblemConfig::cosine(1).build().unwrap();
    let bare = problem.with_data(problem.rhs_h().clone(), problem.neumann_g().clone()).unwrap();
    let samples = SampleSet::draw(&bare, 16, 4, 1).unwrap();
    let u = constant_net(0.0);
    assert!(error_decomposition(&u, &u, &bare, &samples, StaTerm::Bound(0.0), &QuadratureSpec::gauss(8)).is_err());
}

#[test]
fn aligned_vectors_cover_every_subnet() {
    let shape = NetShape::new(5, 3, 3, 2).unwrap();
    let net = crate::netcore::random_uniform(shape, 1.0, &mut SplitRng::new(8));
    let v = aligned_vectors(&net);
    assert_eq!(v.len(), 5);
    assert!(v.iter().all(|w| w.len() == shape.slots_per_subnet()));
}
