//! Trains a small network, builds an approximant of the exact solution, and
//! splits the H¹ error of the trained network into approximation, optimization
//! and statistical parts.

use deep_ritz::approxnet::assemble_approximant;
use deep_ritz::energy::{Field, ProblemConfig, QuadratureSpec, SampleSet};
use deep_ritz::netcore::NetShape;
use deep_ritz::optdiag::{error_decomposition, measured_sta};
use deep_ritz::pgd::{train, PgdConfig};

fn main() -> deep_ritz::Result<()> {
    let problem = ProblemConfig::cosine(1).build()?;
    let quad = QuadratureSpec::gauss(32);
    let samples = SampleSet::draw(&problem, 1024, 1024, 1)?;
    let config = PgdConfig::new(1.0, 10.0, 10.0, 1e-3, 1000, 7);
    let state = train(&problem, NetShape::new(32, 4, 3, 1)?, &config, &samples)?;
    let u_a = state.network();

    let u_bar = assemble_approximant(&Field::cosine_pi(1), 0.1, 3, 1, 2.0)?.net;
    let sta = measured_sta(u_a, &u_bar, &problem, &samples, &quad)?;
    let dec = error_decomposition(u_a, &u_bar, &problem, &samples, sta, &quad)?;
    println!("E_app  = {:.4e}", dec.e_app);
    println!("E_opt⁻ = {:+.4e}", dec.e_opt_minus);
    println!("E_sta  = {:.4e}", dec.e_sta.value());
    println!("‖u_A − u0‖²_H¹ = {:.4e} ≤ {:.4e}", dec.h1_sq_measured, dec.total_bound);
    Ok(())
}
