/// Values of tanh and its first `max_order` derivatives, in order.
///
/// Panics if `max_order > 3`.
pub fn activation_derivatives(x: f64, max_order: usize) -> Vec<f64> {
    assert!(max_order <= 3, "max_order must be at most 3");
    let t = x.tanh();
    let d1 = 1.0 - t * t;
    let all = [t, d1, -2.0 * t * d1, d1 * (6.0 * t * t - 2.0)];
    all[..=max_order].to_vec()
}

#[inline]
pub(crate) fn tanh_d1_d2(z: f64) -> (f64, f64, f64) {
    let t = z.tanh();
    let d1 = 1.0 - t * t;
    (t, d1, -2.0 * t * d1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        assert_eq!(activation_derivatives(0.0, 3), vec![0.0, 1.0, 0.0, -2.0]);
    }

    #[test]
    fn saturates() {
        let v = activation_derivatives(20.0, 0);
        assert_eq!(v.len(), 1);
        assert!(v[0] > 1.0 - 1e-8 && v[0] <= 1.0);
    }

    #[test]
    fn matches_finite_differences() {
        let h = 1e-4;
        for &x in &[0.5, -1.3, 2.0] {
            let d = activation_derivatives(x, 3);
            for k in 1..=3 {
                let f = |y: f64| activation_derivatives(y, k - 1)[k - 1];
                let fd = (f(x + h) - f(x - h)) / (2.0 * h);
                assert!((fd - d[k]).abs() < 1e-8, "order {k} at {x}: {fd} vs {}", d[k]);
            }
        }
    }

    #[test]
    fn bounded_by_two() {
        for i in -400..=400 {
            let x = i as f64 * 0.05;
            for v in activation_derivatives(x, 3) {
                assert!(v.abs() <= 2.0);
            }
        }
    }
}
