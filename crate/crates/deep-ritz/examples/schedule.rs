//! Prints the prescribed hyperparameters for a few target accuracies and shows
//! which of them are still executable.

use deep_ritz::pgd::{schedule, ScheduleConstants};

fn main() -> deep_ritz::Result<()> {
    println!("{:>6} {:>10} {:>3} {:>3} {:>10} {:>10} {:>10} {:>10} feasible", "eps", "m", "W", "L", "T", "N_s", "lambda", "eta");
    for eps in [0.5, 0.2, 0.1, 0.05] {
        let p = schedule(eps, 2, 3.0, 0.5, 1.0, ScheduleConstants::default())?;
        println!(
            "{eps:>6} {:>10.3e} {:>3} {:>3} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {}",
            p.m, p.width, p.depth, p.iterations, p.n_samples, p.lambda, p.eta, p.feasible.overall
        );
    }
    let custom = ScheduleConstants { c: 0.1, ..ScheduleConstants::default() };
    let p = schedule(0.1, 2, 3.0, 0.5, 1.0, custom)?;
    println!("with C = 0.1: m = {:.3e}, T = {:.3e}", p.m, p.iterations);
    Ok(())
}
