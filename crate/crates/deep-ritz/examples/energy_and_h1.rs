//! Compares the Monte Carlo Ritz energy with its quadrature value and checks
//! that the energy gap above the exact solution is sandwiched by the H¹ error.

use deep_ritz::energy::{continuous_energy, empirical_energy, h1_error, FieldFn, ProblemConfig, QuadratureSpec, SampleSet};
use deep_ritz::netcore::{random_uniform, NetShape};
use deep_ritz::rng::SplitRng;

fn main() -> deep_ritz::Result<()> {
    let problem = ProblemConfig::cosine(2).build()?;
    let quad = QuadratureSpec::gauss(32);
    let u0 = FieldFn(problem.exact_solution().expect("manufactured"), 2);
    let l0 = continuous_energy(&u0, &problem, &quad)?;
    println!("c0 = {}, B0 = {}, L(u0) = {l0:.6}", problem.c0(), problem.b0());

    let mut rng = SplitRng::new(5);
    let mut net = random_uniform(NetShape::new(16, 4, 2, 2)?, 1.0, &mut rng);
    net.set_coefficients((0..16).map(|k| if k % 2 == 0 { 0.1 } else { -0.05 }).collect())?;

    let exact = continuous_energy(&net, &problem, &quad)?;
    for n in [100, 1_000, 10_000] {
        let samples = SampleSet::draw(&problem, n, n, 9)?;
        let mc = empirical_energy(&net, &samples, &problem)?;
        println!("N = {n:>6}: L̂(u) = {mc:+.6}  |L − L̂| = {:.2e}", (mc - exact).abs());
    }

    let e2 = h1_error(&net, &problem, &quad)?.powi(2);
    let lower = problem.c0().min(1.0) / 2.0 * e2;
    let upper = problem.b0().max(1.0) / 2.0 * e2;
    println!("{lower:.6} ≤ L(u) − L(u0) = {:.6} ≤ {upper:.6}", exact - l0);
    Ok(())
}
