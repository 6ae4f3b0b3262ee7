//! Euclidean projections used by the projected gradient step: onto an ℓ2 ball
//! around the initial weights and onto the ℓ1 ball of output coefficients.

use deep_ritz::pgd::{l1_norm, l1_threshold, l2_distance, project_l1_ball, project_l2_ball};

fn main() {
    let center = [0.0, 1.0, 0.0];
    let v = [3.0, 5.0, -4.0];
    let p = project_l2_ball(&v, &center, 2.0);
    println!("ℓ2: {v:?} -> {p:.4?} (distance {:.4})", l2_distance(&p, &center));

    let c = [0.9, -0.4, 0.3, 0.05, -1.2];
    let tau = l1_threshold(&c, 1.0);
    let q = project_l1_ball(&c, 1.0);
    println!("ℓ1: {c:?} -> {q:.4?}");
    println!("    threshold {tau:.4}, norm {:.4} -> {:.4}", l1_norm(&c), l1_norm(&q));

    let inside = [0.2, -0.1];
    assert_eq!(project_l1_ball(&inside, 1.0), inside.to_vec());
    println!("points already inside are returned unchanged");
}
