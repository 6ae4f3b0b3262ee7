//! Finds initial sub-networks close to a target network, builds the transition
//! network from the match, and compares the observed match rate with the
//! lower bound on the probability of a successful match.

use deep_ritz::netcore::{random_uniform, NetShape};
use deep_ritz::optdiag::{aligned_vectors, build_transition_network, event_probability_bound, match_initialization};
use deep_ritz::pgd::initialize;
use deep_ritz::rng::SplitRng;

fn main() -> deep_ritz::Result<()> {
    let (w, l, d, b, delta) = (1, 2, 1, 1.0, 0.5);
    let mut target = random_uniform(NetShape::new(2, w, l, d)?, 0.5 * b, &mut SplitRng::new(3));
    let cbar = vec![0.7, -0.3];
    target.set_coefficients(cbar.clone())?;
    let targets = aligned_vectors(&target);

    let m = 2000;
    let init = initialize(NetShape::new(m, w, l, d)?, b, 11);
    let report = match_initialization(&aligned_vectors(init.network()), &targets, 1, delta)?;
    println!("match success: {}, indices {:?}", report.success, report.indices);

    let t = build_transition_network(init.network(), &report, &cbar, 1)?;
    let gap = (0..=200)
        .map(|i| {
            let x = [i as f64 / 200.0];
            (t.net.forward(&x).unwrap() - target.forward(&x).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    println!("transition coefficients: ‖c‖₁ = {:.3}, ‖c‖₂ = {:.3}; sup |u* − ū| = {gap:.3}", t.l1, t.l2);

    let q = (m / targets.len()) as u64;
    let bound = event_probability_bound(targets.len(), 1, q, delta, b, w, l)?;
    let trials = 200;
    let hits = (0..trials)
        .filter(|&s| {
            let init = initialize(NetShape::new(m, w, l, d).unwrap(), b, 1000 + s);
            match_initialization(&aligned_vectors(init.network()), &targets, 1, delta).unwrap().success
        })
        .count();
    println!("P(match) ≥ {bound:.4}; observed {hits}/{trials}");
    Ok(())
}
