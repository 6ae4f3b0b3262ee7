//! The eleven acceptance criteria, run one after another so each gets the whole
//! machine for its timing. Every criterion prints one PASS/FAIL line.

use std::io::Write as _;
use std::time::{Duration, Instant};

use deep_ritz::approxnet::{
    bump_value, calibrate_product_net, calibrate_square_net, measure_sobolev_error, partition_sum, BumpSpec, DEFAULT_X0,
};
use deep_ritz::energy::{
    continuous_energy, empirical_energy, energy_gradient, h1_error, h1_norm, manufacture, BoxDomain, Field, FieldFn, FnEval, Monomial,
    ProblemConfig, QuadratureSpec, SampleSet,
};
use deep_ritz::netcore::bounds::{input_gradient_bound, value_bound};
use deep_ritz::netcore::{random_uniform, FlatParams, NetShape, ParallelNetwork};
use deep_ritz::optdiag::{build_transition_network, event_probability_bound, match_initialization, MatchReport};
use deep_ritz::pgd::{initialize, pgd_step, project_l1_ball, schedule, train, PgdConfig, ScheduleConstants};
use deep_ritz::rng::SplitRng;
use deep_ritz::statbound::{empirical_gap, loglog_slope, ClassSpec};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Polynomial `u0` whose normal derivative does not vanish, so the boundary term is exercised.
fn polynomial_problem(d: usize) -> deep_ritz::energy::EllipticProblem {
    let mut terms = vec![Monomial { coef: 1.0, powers: (0..d).map(|i| if i == 0 { 2 } else { 0 }).collect() }];
    terms.push(Monomial { coef: 0.5, powers: vec![1; d] });
    manufacture(Field::Polynomial { terms }, Field::constant(1.5), BoxDomain::unit(d)).unwrap()
}

fn gradient_correctness() -> Check {
    let root = SplitRng::new(101);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for t in 0..100u64 {
        let mut rng = root.split(t);
        let d = 1 + rng.below(3) as usize;
        let w = 1 + rng.below(8) as usize;
        let l = 1 + rng.below(4) as usize;
        let m = 1 + rng.below(8) as usize;
        let problem = polynomial_problem(d);
        let samples = SampleSet::draw(&problem, 16, 8, t).unwrap();
        let mut net = random_uniform(NetShape::new(m, w, l, d).unwrap(), 2.0, &mut rng);
        net.set_coefficients((0..m).map(|_| rng.uniform_range(-2.0, 2.0)).collect()).unwrap();
        let shape = net.shape();
        let analytic = energy_gradient(&net, &samples, &problem).unwrap();
        let base = net.flatten();
        let energy_at = |i: usize, step: f64| {
            let mut p: FlatParams = base.clone();
            *p.get_mut(i) += step;
            empirical_energy(&ParallelNetwork::unflatten(&p, shape).unwrap(), &samples, &problem).unwrap()
        };
        let h = 1e-3;
        for (i, &an) in analytic.iter().enumerate() {
            // Fourth-order central stencil.
            let fd = (8.0 * (energy_at(i, h) - energy_at(i, -h)) - (energy_at(i, 2.0 * h) - energy_at(i, -2.0 * h))) / (12.0 * h);
            let err = (fd - an).abs();
            ensure(err <= 1e-9 || err <= 1e-5 * an.abs().max(fd.abs()), || {
                format!("config {t} (d={d} W={w} L={l} m={m}) slot {i}: {an} vs {fd}")
            })?;
            if err > 1e-9 {
                worst = worst.max(err / an.abs().max(fd.abs()));
            }
            checked += 1;
        }
    }
    Ok(format!("100 configs, {checked} coordinates, worst relative error {worst:.2e}"))
}

/// Projection onto the ℓ1 ball by enumerating supports and checking the KKT conditions.
fn l1_projection_oracle(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    let n = v.len();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| v[i].abs()).sum::<f64>() - radius) / support.len() as f64;
        let inside = support.iter().all(|&i| v[i].abs() > theta);
        let outside = (0..n).filter(|i| mask & (1 << i) == 0).all(|i| v[i].abs() <= theta);
        if theta >= 0.0 && inside && outside {
            return v.iter().map(|x| x.signum() * (x.abs() - theta).max(0.0)).collect();
        }
    }
    unreachable!("some support satisfies the KKT conditions")
}

fn l1_projection_exactness() -> Check {
    let mut rng = SplitRng::new(202);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = 1 + rng.below(8) as usize;
        let scale = rng.uniform_range(0.1, 5.0);
        let v: Vec<f64> = (0..n).map(|_| rng.uniform_range(-scale, scale)).collect();
        let radius = rng.uniform_range(0.01, 2.0 * scale);
        let p = project_l1_ball(&v, radius);
        let oracle = l1_projection_oracle(&v, radius);
        let diff = p.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        ensure(diff <= 1e-10, || format!("dim {n}, radius {radius}: off by {diff}"))?;
        worst = worst.max(diff);
        let dist = |q: &[f64]| v.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let best = dist(&p);
        for _ in 0..10_000 {
            let r = radius * rng.uniform();
            let q = deep_ritz::statbound::l1_sphere_point(n, r, &mut rng);
            ensure(dist(&q) >= best - 1e-12, || format!("random feasible point beats the projection: {} < {best}", dist(&q)))?;
        }
    }
    Ok(format!("10³ vectors, max deviation from oracle {worst:.1e}"))
}

fn sandwich() -> Check {
    let quad = QuadratureSpec::gauss(32);
    let mut worst = 0.0f64;
    for d in [1, 2] {
        let problem = ProblemConfig::cosine(d).build().unwrap();
        let u0 = FieldFn(problem.exact_solution().unwrap(), d);
        let l0 = continuous_energy(&u0, &problem, &quad).unwrap();
        let (lo_c, hi_c) = (problem.c0().min(1.0) / 2.0, problem.b0().max(1.0) / 2.0);
        let root = SplitRng::new(300 + d as u64);
        for t in 0..50 {
            let mut rng = root.split(t);
            let m = 1 + rng.below(4) as usize;
            let mut net = random_uniform(NetShape::new(m, 2 + rng.below(3) as usize, 2 + rng.below(2) as usize, d).unwrap(), 1.0, &mut rng);
            net.set_coefficients((0..m).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).unwrap();
            let gap = continuous_energy(&net, &problem, &quad).unwrap() - l0;
            let e2 = h1_error(&net, &problem, &quad).unwrap().powi(2);
            let slack = 1e-6 * gap.abs().max(1e-300);
            ensure(lo_c * e2 <= gap + slack && gap <= hi_c * e2 + slack, || {
                format!("d={d} net {t}: {} ≤ {gap} ≤ {} fails", lo_c * e2, hi_c * e2)
            })?;
            worst = worst.max((gap - 0.5 * e2).abs() / gap.abs());
        }
    }
    Ok(format!("100 nets, largest |gap − ½‖e‖²|/gap = {worst:.1e}"))
}

fn constraint_invariance() -> Check {
    let problem = ProblemConfig::cosine(1).build().unwrap();
    let samples = SampleSet::draw(&problem, 128, 16, 4).unwrap();
    let mut config = PgdConfig::new(1.0, 0.5, 0.5, 0.05, 10_000, 4);
    config.log_every = Some(10_000);
    let mut state = initialize(NetShape::new(8, 4, 3, 1).unwrap(), config.b, config.seed);
    let (mut min_l2, mut min_l1) = (f64::INFINITY, f64::INFINITY);
    for t in 0..10_000 {
        pgd_step(&mut state, &problem, &samples, &config).map_err(|e| e.to_string())?;
        let (s2, s1) = (state.l2_slack(config.eta), state.l1_slack(config.zeta));
        ensure(s2 >= -1e-12 * config.eta && s1 >= -1e-12 * config.zeta, || format!("iteration {t}: slacks {s2}, {s1}"))?;
        min_l2 = min_l2.min(s2);
        min_l1 = min_l1.min(s1);
    }
    ensure(min_l1 < 1e-9 * config.zeta, || format!("ℓ1 ball never active (min slack {min_l1})"))?;
    Ok(format!("10⁴ steps, min slacks ℓ2 {min_l2:.1e}, ℓ1 {min_l1:.1e}"))
}

fn builders() -> Check {
    let square = FnEval(1, |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]));
    let product = FnEval(2, |x: &[f64]| (x[0] * x[1], vec![x[1], x[0]]));
    let mut notes = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let s = calibrate_square_net(eps, DEFAULT_X0).map_err(|e| e.to_string())?;
        let es = measure_sobolev_error(&square, &s.net, 1, 10_000).unwrap();
        let p = calibrate_product_net(eps, 0.0, 1.0).map_err(|e| e.to_string())?;
        let ep = measure_sobolev_error(&product, &p.net, 1, 101).unwrap();
        ensure(es <= eps && ep <= eps, || format!("ε={eps}: square {es}, product {ep}"))?;
        notes.push(format!("ε={eps}: {es:.3}/{ep:.3}"));
    }
    let mut pu = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..100 {
        let v = partition_sum(8, 16.0, &[(k as f64 + 0.5) / 100.0]);
        pu = (pu.0.min(v), pu.1.max(v));
    }
    ensure(pu.0 >= 1.0 - 1e-4 && pu.1 <= 1.0 + 1e-4, || format!("partition of unity spans [{}, {}]", pu.0, pu.1))?;
    let mut tail = 0.0f64;
    for m in 0..=8usize {
        let spec = BumpSpec::new(8, 20.0, vec![m]).unwrap();
        let c = m as f64 / 8.0;
        tail = tail.max(bump_value(&spec, &[c + 0.25]).abs()).max(bump_value(&spec, &[c - 0.25]).abs());
    }
    ensure(tail < 1e-6, || format!("bump tail {tail}"))?;
    Ok(format!("{}; PU in [{:.2e}, {:.2e}] around 1; tail {tail:.1e}", notes.join(", "), pu.0 - 1.0, pu.1 - 1.0))
}

fn magnitude_bounds() -> Check {
    let root = SplitRng::new(606);
    let mut ratios = (0.0f64, 0.0f64);
    for t in 0..10_000 {
        let mut rng = root.split(t);
        let (w, l, d) = (1 + rng.below(8) as usize, 2 + rng.below(4) as usize, 1 + rng.below(3) as usize);
        let b = rng.uniform_range(1.0, 3.0);
        let net = random_uniform(NetShape::new(1, w, l, d).unwrap(), b, &mut rng);
        let x: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        let (v, g) = net.subnets()[0].value_and_gradient(&x).unwrap();
        let (vb, gb) = (value_bound(w, b), input_gradient_bound(w, l, b));
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure(v.abs() <= vb && gmax <= gb, || format!("pair {t} (W={w} L={l} B={b}): |φ|={v} vs {vb}, |∂φ|={gmax} vs {gb}"))?;
        ratios = (ratios.0.max(v.abs() / vb), ratios.1.max(gmax / gb));
    }
    Ok(format!("10⁴ pairs, zero violations; tightest ratios {:.3} and {:.3}", ratios.0, ratios.1))
}

fn end_to_end_solve() -> Check {
    let problem = ProblemConfig::cosine(1).build().unwrap();
    let quad = QuadratureSpec::gauss(32);
    let samples = SampleSet::draw(&problem, 2048, 2048, 1).unwrap();
    let mut config = PgdConfig::new(1.0, 10.0, 10.0, 1e-3, 3500, 7);
    config.deterministic = true;
    let state = train(&problem, NetShape::new(64, 4, 3, 1).unwrap(), &config, &samples).map_err(|e| e.to_string())?;
    let u0 = FieldFn(problem.exact_solution().unwrap(), 1);
    let rel = h1_error(state.network(), &problem, &quad).unwrap() / h1_norm(&u0, &problem, &quad).unwrap();
    let l0 = continuous_energy(&u0, &problem, &quad).unwrap();
    let initial = continuous_energy(initialize(state.network().shape(), config.b, config.seed).network(), &problem, &quad).unwrap();
    let last = continuous_energy(state.network(), &problem, &quad).unwrap();
    let fraction = (initial - last) / (initial - l0);
    let hist = state.history();
    let detail = format!(
        "T=3500: relative H¹ error {rel:.4}, L from {initial:.4} to {last:.4} (L(u0)={l0:.4}, {:.0}% of the gap), L̂ from {:.4} to {:.4}",
        100.0 * fraction,
        hist[0].energy,
        hist.last().unwrap().energy
    );
    ensure(rel <= 0.2 && fraction >= 0.5, || detail.clone())?;
    Ok(detail)
}

fn transition_norms() -> Check {
    let mut rng = SplitRng::new(808);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m_bar = 1 + rng.below(8) as usize;
        let r = 1 + rng.below(6) as usize;
        let cbar: Vec<f64> = (0..m_bar).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
        let init = random_uniform(NetShape::new(m_bar * r + rng.below(4) as usize, 2, 2, 1).unwrap(), 1.0, &mut rng);
        let rep =
            MatchReport { indices: (0..m_bar).map(|k| (0..r).map(|v| k * r + v).collect()).collect(), delta_used: 0.0, success: true };
        let t = build_transition_network(&init, &rep, &cbar, r).unwrap();
        let l1: f64 = t.net.coefficients().iter().map(|c| c.abs()).sum();
        let m_l1: f64 = cbar.iter().map(|c| c.abs()).sum();
        let l2 = t.net.coefficients().iter().map(|c| c * c).sum::<f64>().sqrt();
        // Summing m̄R quotients c̄_k/R rounds, so equality is checked to a few ulps.
        ensure((l1 - m_l1).abs() <= 4.0 * f64::EPSILON * m_l1 && (t.l1 - l1).abs() <= 4.0 * f64::EPSILON * m_l1, || {
            format!("ℓ1 {l1} vs {m_l1}")
        })?;
        ensure(l2 <= m_l1 / (r as f64).sqrt() * (1.0 + 1e-15), || format!("ℓ2 {l2} above {}", m_l1 / (r as f64).sqrt()))?;
        worst = worst.max((l1 - m_l1).abs() / m_l1);
    }
    Ok(format!("200 constructions, largest relative ℓ1 deviation {worst:.1e}"))
}

fn event_probability() -> Check {
    // Target at the corner of the box: each weight matches with probability exactly δ/(2B).
    let (b, delta, dim, m, trials) = (1.0, 0.6, 2, 20, 10_000);
    let q: f64 = delta / (2.0 * b);
    let exact = 1.0 - (1.0 - q.powi(dim as i32)).powi(m);
    let bound = event_probability_bound(1, 1, m as u64, delta, b, 1, 1).unwrap();
    let target = vec![vec![b; dim]];
    let root = SplitRng::new(909);
    let hits = (0..trials)
        .filter(|&t| {
            let mut rng = root.split(t);
            let init: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.uniform_range(-b, b)).collect()).collect();
            match_initialization(&init, &target, 1, delta).unwrap().success
        })
        .count();
    let freq = hits as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    let detail = format!("P(G) = {freq:.4}, exact {exact:.4} ± {sigma:.4}, bound {bound:.4}");
    ensure((freq - exact).abs() <= 4.0 * sigma && freq >= bound - 4.0 * sigma, || detail.clone())?;
    Ok(detail)
}

fn statistical_gap_slope() -> Check {
    let problem = ProblemConfig::cosine(1).build().unwrap();
    let quad = QuadratureSpec::gauss(32);
    let class = ClassSpec { m: 4, coeff_l1: 1.0, width: 4, depth: 3, weight_sup: 1.0, n_s: 100, xi: 0.05, d: 1 };
    let sizes = [100usize, 1000, 10_000, 100_000];
    let gaps: Vec<f64> = sizes.iter().map(|&n| empirical_gap(&problem, &class, n, 64, 10, &quad).unwrap().value).collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&xs, &gaps);
    let detail = format!("gaps {gaps:.4?}, slope {slope:.3}");
    ensure((-0.7..=-0.3).contains(&slope), || detail.clone())?;
    Ok(detail)
}

fn schedule_calculator() -> Check {
    for d in 1..=10usize {
        let mut k = 0;
        while (1usize << k) < d + 1 {
            k += 1;
        }
        let p = schedule(0.1, d, 3.0, 0.5, 1.0, ScheduleConstants::default()).unwrap();
        ensure(p.width == 1 << (k + 1) && p.depth == k + 2, || format!("d={d}: W={} L={}", p.width, p.depth))?;
    }
    let p3 = schedule(0.1, 3, 3.0, 0.5, 1.0, ScheduleConstants::default()).unwrap();
    ensure(p3.width == 8 && p3.depth == 4, || "d=3 must give W=8, L=4".into())?;
    let mut worst = 0.0f64;
    for d in 1..=10usize {
        for (n, mu, beta) in [(2.5, 0.25, 0.5), (3.0, 0.5, 1.0), (4.0, 0.9, 5.0), (6.0, 0.1, 3.0)] {
            let p = schedule(0.05, d, n, mu, beta, ScheduleConstants::default()).unwrap();
            let df = d as f64;
            let beta0 = f64::max(beta, 2.0 + 2.0 * df / (n - mu - 1.0));
            let c3 = 4.0 * beta0 * (df + 1.0).ln() + 6.0 * df / (n - mu - 1.0) + 12.0 * beta0 + 2.0;
            let err = ((p.beta0 - beta0).abs() / beta0).max((p.c3 - c3).abs() / c3);
            ensure(err <= 1e-12, || format!("d={d} n={n} μ={mu} β={beta}: β₀ {} vs {beta0}, C₃ {} vs {c3}", p.beta0, p.c3))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("W, L for d = 1..10; β₀ and C₃ on 40 cases, worst relative error {worst:.1e}"))
}

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("gradient correctness", 60, gradient_correctness),
        ("ℓ1 projection exactness", 10, l1_projection_exactness),
        ("energy sandwich", 60, sandwich),
        ("constraint invariance", 120, constraint_invariance),
        ("gadget builders", 60, builders),
        ("magnitude bounds", 30, magnitude_bounds),
        ("end-to-end solve", 120, end_to_end_solve),
        ("transition-network norms", 5, transition_norms),
        ("event-G probability", 30, event_probability),
        ("statistical-gap slope", 300, statistical_gap_slope),
        ("schedule calculator", 1, schedule_calculator),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let late = elapsed > Duration::from_secs(limit);
        let (verdict, detail) = match (&outcome, late) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over time limit; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        let line = format!("criterion {:>2} {verdict} [{:>7.2} s / {limit} s] {name}: {detail}", i + 1, elapsed.as_secs_f64());
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        if verdict == "FAIL" {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
