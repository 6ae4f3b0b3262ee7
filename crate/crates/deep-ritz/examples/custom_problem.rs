//! Describes a problem in JSON, with a variable coefficient `ω = 2 + x₁x₂` and a
//! polynomial exact solution, then trains on it and tracks the H¹ error.

use deep_ritz::energy::{h1_norm, FieldFn, ProblemConfig, QuadratureSpec, SampleSet};
use deep_ritz::netcore::NetShape;
use deep_ritz::pgd::{train, PgdConfig};

const PROBLEM: &str = r#"{
  "d": 2,
  "omega": { "kind": "polynomial", "params": { "terms": [
    { "coef": 2.0, "powers": [0, 0] },
    { "coef": 1.0, "powers": [1, 1] } ] } },
  "u0": { "kind": "polynomial", "params": { "terms": [
    { "coef": 1.0, "powers": [2, 1] },
    { "coef": 0.5, "powers": [0, 0] } ] } }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config: ProblemConfig = serde_json::from_str(PROBLEM)?;
    let problem = config.build()?;
    println!("c0 = {}, B0 = {:.3}", problem.c0(), problem.b0());
    for w in problem.warnings() {
        println!("warning: {w}");
    }

    let quad = QuadratureSpec::gauss(16);
    let norm = h1_norm(&FieldFn(problem.exact_solution().expect("u0 given"), 2), &problem, &quad)?;
    let samples = SampleSet::draw(&problem, 1024, 1024, 3)?;
    let mut pgd = PgdConfig::new(1.0, 10.0, 10.0, 2e-3, 1500, 5);
    pgd.log_every = Some(250);
    pgd.h1_quadrature = Some(quad);
    let state = train(&problem, NetShape::new(32, 4, 3, 2)?, &pgd, &samples)?;

    println!("{:>6} {:>12} {:>10}", "iter", "energy", "rel_h1");
    for r in state.history() {
        println!("{:>6} {:>12.6} {:>10.4}", r.iter, r.energy, r.h1_error.unwrap_or(f64::NAN) / norm);
    }
    Ok(())
}
