use super::*;
use crate::netcore::{random_uniform, NetShape, ParallelNetwork};
use crate::rng::SplitRng;

fn random_net(shape: NetShape, b: f64, seed: u64) -> ParallelNetwork {
    let mut rng = SplitRng::new(seed);
    let mut net = random_uniform(shape, b, &mut rng);
    net.set_coefficients((0..shape.m).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).unwrap();
    net
}

fn linear_fn(d: usize) -> FnEval<impl Fn(&[f64]) -> (f64, Vec<f64>)> {
    FnEval(d, |x: &[f64]| (x[0], vec![1.0]))
}

fn flux_problem() -> EllipticProblem {
    manufacture(Field::monomial(1.0, vec![2, 1]), Field::constant(2.0), BoxDomain::unit(2)).unwrap()
}

#[test]
fn zero_network_has_zero_energy() {
    let p = flux_problem();
    let s = SampleSet::draw(&p, 100, 50, 1).unwrap();
    let net = ParallelNetwork::zeros(NetShape::new(3, 4, 3, 2).unwrap());
    assert_eq!(empirical_energy(&net, &s, &p).unwrap(), 0.0);
    assert_eq!(continuous_energy(&net, &p, &QuadratureSpec::gauss(8)).unwrap(), 0.0);
}

#[test]
fn single_point_energy_by_hand() {
    let p = flux_problem();
    let s = SampleSet::from_points(2, vec![0.3, 0.6], vec![1.0, 0.25], vec![1], 0).unwrap();
    let net = random_net(NetShape::new(2, 3, 3, 2).unwrap(), 1.0, 4);
    let (u, g) = net.value_and_gradient(&[0.3, 0.6]).unwrap();
    let h = p.rhs_h().value(&[0.3, 0.6]);
    let ub = net.forward(&[1.0, 0.25]).unwrap();
    // g = ∂(x²y)/∂x = 2xy on the face x = 1.
    let expected = 0.5 * (g[0] * g[0] + g[1] * g[1]) + 0.5 * 2.0 * u * u - u * h - 4.0 * ub * 0.5;
    let got = empirical_energy(&net, &s, &p).unwrap();
    assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
}

#[test]
fn interior_term_scales_with_volume() {
    let half = BoxDomain::new(vec![0.0], vec![0.5]).unwrap();
    let full = BoxDomain::unit(1);
    let make = |b: BoxDomain| {
        EllipticProblem::new(b, Field::constant(1.0), Field::constant(1.0), BoundaryField::Trace(Field::constant(0.0)), None).unwrap()
    };
    let pts: Vec<f64> = (1..50).map(|i| i as f64 / 100.0).collect();
    let s = SampleSet::from_points(1, pts, vec![], vec![], 0).unwrap();
    let net = random_net(NetShape::new(2, 3, 2, 1).unwrap(), 1.0, 2);
    let a = empirical_energy(&net, &s, &make(half)).unwrap();
    let b = empirical_energy(&net, &s, &make(full)).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-14 * b.abs().max(1.0));
}

#[test]
fn linear_function_energy_closed_form() {
    let p = EllipticProblem::new(
        BoxDomain::unit(1),
        Field::constant(1.0),
        Field::constant(0.0),
        BoundaryField::Trace(Field::constant(0.0)),
        None,
    )
    .unwrap();
    let e = continuous_energy(&linear_fn(1), &p, &QuadratureSpec::gauss(4)).unwrap();
    assert!((e - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn h1_error_closed_forms() {
    let p = manufacture(Field::constant(0.0), Field::constant(1.0), BoxDomain::unit(1)).unwrap();
    let e = h1_error(&linear_fn(1), &p, &QuadratureSpec::gauss(8)).unwrap();
    assert!((e - (4.0f64 / 3.0).sqrt()).abs() < 1e-14);
    let flipped = FnEval(1, |x: &[f64]| (-x[0], vec![-1.0]));
    assert!((h1_error(&flipped, &p, &QuadratureSpec::gauss(8)).unwrap() - e).abs() < 1e-15);

    let c = ProblemConfig::cosine(2).build().unwrap();
    let u0 = FieldFn(c.exact_solution().unwrap(), 2);
    assert!(h1_error(&u0, &c, &QuadratureSpec::gauss(16)).unwrap() < 1e-14);
    let no_exact = c.with_data(Field::constant(1.0), BoundaryField::Trace(Field::constant(0.0))).unwrap();
    assert!(h1_error(&u0, &no_exact, &QuadratureSpec::gauss(4)).is_err());
}

#[test]
fn cosine_energy_and_norm_closed_forms() {
    let p = ProblemConfig::cosine(1).build().unwrap();
    let u0 = FieldFn(p.exact_solution().unwrap(), 1);
    let pi2 = std::f64::consts::PI.powi(2);
    let e = continuous_energy(&u0, &p, &QuadratureSpec::gauss(32)).unwrap();
    assert!((e + (pi2 + 1.0) / 4.0).abs() < 1e-13);
    let n = h1_norm(&u0, &p, &QuadratureSpec::gauss(32)).unwrap();
    assert!((n - (0.5 + pi2 / 2.0).sqrt()).abs() < 1e-13);
}

#[test]
fn monte_carlo_matches_quadrature() {
    let p = flux_problem();
    let net = random_net(NetShape::new(2, 3, 2, 2).unwrap(), 1.0, 5);
    let n = 1_000_000;
    let s = SampleSet::draw(&p, n, n, 77).unwrap();
    let emp = empirical_energy(&net, &s, &p).unwrap();
    let exact = continuous_energy(&net, &p, &QuadratureSpec::gauss(24)).unwrap();
    let mut ivals = Vec::with_capacity(n);
    for x in s.interior() {
        let (u, g) = net.value_and_gradient(x).unwrap();
        ivals.push(0.5 * (g[0] * g[0] + g[1] * g[1]) + 0.5 * p.omega().value(x) * u * u - u * p.rhs_h().value(x));
    }
    let mut bvals = Vec::with_capacity(n);
    for (y, f) in s.boundary() {
        bvals.push(4.0 * p.neumann_g().value(y, f) * net.forward(y).unwrap());
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let se = ((var(&ivals) + var(&bvals)) / n as f64).sqrt();
    assert!((emp - exact).abs() < 5.0 * se, "{emp} vs {exact} (se {se})");
}

#[test]
fn empirical_energy_is_unbiased() {
    let p = ProblemConfig::cosine(1).build().unwrap();
    let net = random_net(NetShape::new(3, 4, 3, 1).unwrap(), 1.0, 6);
    let exact = continuous_energy(&net, &p, &QuadratureSpec::gauss(32)).unwrap();
    let diffs: Vec<f64> =
        (0..200).map(|k| empirical_energy(&net, &SampleSet::draw(&p, 200, 2, 1000 + k).unwrap(), &p).unwrap() - exact).collect();
    let m = diffs.iter().sum::<f64>() / 200.0;
    let sd = (diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / 199.0).sqrt();
    let t = m / (sd / 200f64.sqrt());
    assert!(t.abs() < 4.0, "t = {t}");
}

fn fd_check(net: &ParallelNetwork, s: &SampleSet, p: &EllipticProblem) {
    let grad = energy_gradient(net, s, p).unwrap();
    let flat = net.flatten();
    let shape = net.shape();
    let mut gflat = grad.clone();
    for i in 0..flat.len() {
        let base = *flat.clone().get_mut(i);
        let h = 1e-5 * base.abs().max(1.0);
        let mut a = flat.clone();
        *a.get_mut(i) = base + h;
        let mut b = flat.clone();
        *b.get_mut(i) = base - h;
        let fa = empirical_energy(&ParallelNetwork::unflatten(&a, shape).unwrap(), s, p).unwrap();
        let fb = empirical_energy(&ParallelNetwork::unflatten(&b, shape).unwrap(), s, p).unwrap();
        let fd = (fa - fb) / (2.0 * h);
        let an = *gflat.get_mut(i);
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(fd.abs()) + 1e-9, "slot {i}: {fd} vs {an}");
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let p = flux_problem();
    let s = SampleSet::draw(&p, 40, 20, 3).unwrap();
    fd_check(&random_net(NetShape::new(3, 3, 3, 2).unwrap(), 1.5, 9), &s, &p);
    let c = ProblemConfig::cosine(1).build().unwrap();
    let s = SampleSet::draw(&c, 40, 4, 3).unwrap();
    fd_check(&random_net(NetShape::new(2, 4, 4, 1).unwrap(), 2.0, 10), &s, &c);
}

#[test]
fn outer_gradient_is_averaged_subnet_contribution() {
    let p = flux_problem();
    let s = SampleSet::draw(&p, 64, 32, 8).unwrap();
    let net = random_net(NetShape::new(3, 4, 3, 2).unwrap(), 1.0, 11);
    let grad = energy_gradient(&net, &s, &p).unwrap();
    for (k, sub) in net.subnets().iter().enumerate() {
        let single = {
            let mut c = vec![0.0; 3];
            c[k] = 1.0;
            let mut n = net.clone();
            n.set_coefficients(c).unwrap();
            n
        };
        let mut acc = 0.0;
        for x in s.interior() {
            let (u, gu) = net.value_and_gradient(x).unwrap();
            let (phi, gphi) = single.value_and_gradient(x).unwrap();
            acc += (gu[0] * gphi[0] + gu[1] * gphi[1] + p.omega().value(x) * u * phi - p.rhs_h().value(x) * phi) / 64.0;
        }
        for (y, f) in s.boundary() {
            acc -= 4.0 * p.neumann_g().value(y, f) * sub.eval(y) / 32.0;
        }
        assert!((grad.outer[k] - acc).abs() < 1e-12 * acc.abs().max(1.0));
    }
}

#[test]
fn gradient_is_linear_in_data() {
    let base = flux_problem();
    let h1 = Field::cosine_pi(2);
    let h2 = Field::monomial(3.0, vec![1, 2]);
    let g1 = BoundaryField::Trace(Field::monomial(1.0, vec![1, 0]));
    let g2 = BoundaryField::Trace(Field::constant(-2.0));
    let p1 = base.with_data(h1.clone(), g1.clone()).unwrap();
    let p2 = base.with_data(h2.clone(), g2.clone()).unwrap();
    let sum = base
        .with_data(
            Field::Sum { terms: vec![h1, h2] },
            BoundaryField::Trace(Field::Sum { terms: vec![Field::monomial(1.0, vec![1, 0]), Field::constant(-2.0)] }),
        )
        .unwrap();
    let s = SampleSet::draw(&base, 100, 100, 12).unwrap();
    let net = random_net(NetShape::new(2, 3, 3, 2).unwrap(), 1.0, 13);
    // Remove the data-independent part by differencing against a zero-data problem.
    let p0 = base.with_data(Field::constant(0.0), BoundaryField::Trace(Field::constant(0.0))).unwrap();
    let g0 = energy_gradient(&net, &s, &p0).unwrap();
    let lin = |p: &EllipticProblem| {
        let mut g = energy_gradient(&net, &s, p).unwrap();
        g.axpy(-1.0, &g0);
        g
    };
    let (a, b, c) = (lin(&p1), lin(&p2), lin(&sum));
    let scale = c.norm2().max(1.0);
    for ((x, y), z) in a.iter().zip(b.iter()).zip(c.iter()) {
        assert!((x + y - z).abs() <= 1e-12 * scale);
    }
}

#[test]
fn reductions_agree_bitwise() {
    let p = flux_problem();
    let s = SampleSet::draw(&p, 1000, 300, 14).unwrap();
    let net = random_net(NetShape::new(4, 4, 3, 2).unwrap(), 1.0, 15);
    let seq = EnergyEvaluator::new(&p, &s).unwrap().with_reduction(Reduction::Sequential);
    let par = EnergyEvaluator::new(&p, &s).unwrap().with_reduction(Reduction::Parallel);
    let (e1, g1) = seq.energy_and_gradient(&net).unwrap();
    let (e2, g2) = par.energy_and_gradient(&net).unwrap();
    assert_eq!(e1.to_bits(), e2.to_bits());
    assert_eq!(g1, g2);
    assert_eq!(e1.to_bits(), seq.energy(&net).unwrap().to_bits());
}

#[test]
fn sandwich_on_cosine_problem() {
    for d in 1..=2 {
        let p = ProblemConfig::cosine(d).build().unwrap();
        let q = QuadratureSpec::gauss(32);
        let u0 = FieldFn(p.exact_solution().unwrap(), d);
        let e0 = continuous_energy(&u0, &p, &q).unwrap();
        for seed in 0..5 {
            let net = random_net(NetShape::new(4, 4, 3, d).unwrap(), 1.0, 100 + seed);
            let gap = continuous_energy(&net, &p, &q).unwrap() - e0;
            let err2 = h1_error(&net, &p, &q).unwrap().powi(2);
            let lo = p.c0().min(1.0) / 2.0 * err2;
            let hi = p.b0().max(1.0) / 2.0 * err2;
            assert!(gap >= lo * (1.0 - 1e-6) && gap <= hi * (1.0 + 1e-6));
        }
    }
}
