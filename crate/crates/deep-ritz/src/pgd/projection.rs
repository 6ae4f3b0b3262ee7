/// Euclidean projection onto `{w : ‖w − center‖₂ ≤ radius}`.
pub fn project_l2_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    project_l2_ball_in_place(&mut out, center, radius);
    out
}

pub fn project_l2_ball_in_place(v: &mut [f64], center: &[f64], radius: f64) {
    assert_eq!(v.len(), center.len(), "dimension mismatch");
    let dist = l2_distance(v, center);
    if dist <= radius {
        return;
    }
    for (x, c) in v.iter_mut().zip(center) {
        *x = c + (*x - c) * radius / dist;
    }
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Soft-threshold level `τ` with `Σ max(|v_i| − τ, 0) = radius`, via sorting.
/// Returns 0 when `v` already lies in the ball.
pub fn l1_threshold(v: &[f64], radius: f64) -> f64 {
    if l1_norm(v) <= radius {
        return 0.0;
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - radius) / (j + 1) as f64;
        if m > t {
            tau = t;
        } else {
            break;
        }
    }
    tau
}

/// Euclidean projection onto `{w : ‖w‖₁ ≤ radius}`.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    project_l1_ball_in_place(&mut out, radius);
    out
}

pub fn project_l1_ball_in_place(v: &mut [f64], radius: f64) {
    if l1_norm(v) <= radius {
        return;
    }
    let tau = l1_threshold(v, radius);
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - tau).max(0.0);
    }
    // Rounding in the threshold can leave the norm slightly above the radius.
    let mut n = l1_norm(v);
    if n > radius {
        let mut s = radius / n;
        while n > radius {
            v.iter_mut().for_each(|x| *x *= s);
            n = l1_norm(v);
            s = 1.0 - 2.0 * f64::EPSILON;
        }
    }
}
