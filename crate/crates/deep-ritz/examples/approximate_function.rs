//! Assembles a localized-Taylor network for `cos(πx)` at a few accuracies and
//! prints the size of the resulting network and its measured W^{1,∞} error.

use deep_ritz::approxnet::{assemble_approximant, assemble_approximant_with, ApproxOptions};
use deep_ritz::energy::Field;

fn main() -> deep_ritz::Result<()> {
    let f = Field::cosine_pi(1);
    println!("{:>6} {:>5} {:>8} {:>6} {:>3} {:>3} {:>10} {:>12}", "eps", "N", "s", "m_bar", "W", "L", "M_bar", "error");
    for eps in [0.3, 0.1, 0.05] {
        let a = assemble_approximant(&f, eps, 3, 1, 2.0)?;
        let r = &a.report;
        println!(
            "{eps:>6} {:>5} {:>8.2} {:>6} {:>3} {:>3} {:>10.3} {:>12.3e}",
            r.grid, r.s, r.m_bar, r.width, r.depth, r.coeff_l1, r.measured_error
        );
    }

    let tight = ApproxOptions { cap: 50, ..ApproxOptions::default() };
    match assemble_approximant_with(&f, 1e-4, 3, 1, 2.0, &tight) {
        Ok(_) => println!("unexpectedly fit under the cap"),
        Err(e) => println!("refused: {e}"),
    }
    Ok(())
}
