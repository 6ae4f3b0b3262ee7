//! Sweeps the sample size, estimating the generalization gap of a small network
//! class and comparing its decay with the closed-form bound. Also estimates the
//! Rademacher complexity of a finite family of class members.

use deep_ritz::energy::{ProblemConfig, QuadratureSpec};
use deep_ritz::rng::SplitRng;
use deep_ritz::statbound::{
    empirical_gap, empirical_rademacher, evaluate_family, loglog_slope, sample_class_member, statistical_bound, ClassSpec,
};

fn main() -> deep_ritz::Result<()> {
    let problem = ProblemConfig::cosine(1).build()?;
    let quad = QuadratureSpec::gauss(32);
    let class = ClassSpec { m: 8, coeff_l1: 1.0, width: 4, depth: 2, weight_sup: 1.0, n_s: 1, xi: 0.1, d: 1 };

    let sizes = [100, 400, 1600, 6400];
    let mut gaps = Vec::new();
    println!("{:>6} {:>12} {:>12}", "N_s", "gap", "bound (C=1)");
    for n in sizes {
        let gap = empirical_gap(&problem, &class, n, 64, 2, &quad)?;
        let bound = statistical_bound(&ClassSpec { n_s: n, ..class }, 1.0)?;
        println!("{n:>6} {:>12.4e} {:>12.4e}", gap.value, bound);
        gaps.push(gap.value);
    }
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    println!("log-log slope of the gap: {:.3}", loglog_slope(&xs, &gaps));

    let mut rng = SplitRng::new(8);
    let family = (0..32).map(|_| sample_class_member(&class, &mut rng)).collect::<deep_ritz::Result<Vec<_>>>()?;
    for n in [100, 1000] {
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform()]).collect();
        let values = evaluate_family(&family, &points)?;
        println!("Rademacher estimate, N = {n}: {:.4e}", empirical_rademacher(&values, 200, 4)?);
    }
    Ok(())
}
