//! Trains a 64-subnet network on `-u'' + u = (π²+1) cos(πx)` with zero Neumann data
//! and reports the energy and H¹ error along the way.

use std::time::Instant;

use deep_ritz::energy::{continuous_energy, h1_norm, FieldFn, ProblemConfig, QuadratureSpec, SampleSet};
use deep_ritz::netcore::NetShape;
use deep_ritz::pgd::{continue_training, initialize, PgdConfig};

fn main() -> deep_ritz::Result<()> {
    let problem = ProblemConfig::cosine(1).build()?;
    let quad = QuadratureSpec::gauss(32);
    let u0 = FieldFn(problem.exact_solution().expect("manufactured"), 1);
    let target = continuous_energy(&u0, &problem, &quad)?;
    let norm = h1_norm(&u0, &problem, &quad)?;

    let samples = SampleSet::draw(&problem, 2048, 2048, 1)?;
    let shape = NetShape::new(64, 4, 3, 1)?;
    let mut config = PgdConfig::new(1.0, 10.0, 10.0, 1e-3, 4000, 7);
    config.log_every = Some(500);
    config.h1_quadrature = Some(quad);

    let start = Instant::now();
    let mut state = initialize(shape, config.b, config.seed);
    continue_training(&mut state, &problem, &config, &samples, config.iterations)?;
    println!("L(u0) = {target:.6}");
    println!("{:>6} {:>12} {:>12} {:>10}", "iter", "energy", "grad_norm", "rel_h1");
    for r in state.history() {
        println!("{:>6} {:>12.6} {:>12.4e} {:>10.4}", r.iter, r.energy, r.grad_norm, r.h1_error.unwrap_or(f64::NAN) / norm);
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
