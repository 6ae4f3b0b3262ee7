//! The small tanh gadgets behind the approximants: squares, products and
//! monomials with calibrated difference steps, and the bump partition of unity.

use deep_ritz::approxnet::{calibrate_monomial_net, calibrate_product_net, calibrate_square_net, partition_sum, DEFAULT_X0};

fn main() -> deep_ritz::Result<()> {
    println!("{:>6} {:>14} {:>14} {:>14} {:>14}", "eps", "square err", "product err", "x1x2x3 err", "x1x2x3 target");
    for eps in [0.1, 0.05, 0.025] {
        let sq = calibrate_square_net(eps, DEFAULT_X0)?;
        let pr = calibrate_product_net(eps, 0.0, 1.0)?;
        let mono = calibrate_monomial_net(eps, 3)?;
        println!(
            "{eps:>6} {:>14.3e} {:>14.3e} {:>14.3e} {:>14.3e}",
            sq.measured_error, pr.measured_error, mono.measured_error, mono.target
        );
    }

    let sq = calibrate_square_net(0.05, DEFAULT_X0)?;
    println!("square net: width {}, depth {}, C = {:.3}", sq.net.width(), sq.net.depth(), sq.constant);
    for x in [0.0, 0.3, 0.7, 1.0] {
        println!("  x = {x}: net {:.5}, x² {:.5}", sq.net.eval(&[x]), x * x);
    }

    let worst = (0..=100).map(|i| (partition_sum(8, 16.0, &[i as f64 / 100.0]) - 1.0).abs()).fold(0.0, f64::max);
    println!("partition of unity, N = 8, s = 16: max |Σ Ψ − 1| = {worst:.2e}");
    Ok(())
}
