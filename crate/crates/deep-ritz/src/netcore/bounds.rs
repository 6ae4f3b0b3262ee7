//! Closed-form magnitude and Lipschitz bounds for a sub-network with hidden
//! widths at most `W`, depth `L` and all weights bounded by `B ≥ 1`.

/// Bound on `|φ(x)|`: `(W+1)B`.
///
/// Needs `L ≥ 2`: the output layer must read tanh activations. A depth-1 net is affine
/// in `x` and only obeys `(d+1)B`.
pub fn value_bound(width: usize, b: f64) -> f64 {
    (width as f64 + 1.0) * b
}

/// Bound on each `|∂φ/∂x_i|`: `W^{L-1} B^L`.
pub fn input_gradient_bound(width: usize, depth: usize, b: f64) -> f64 {
    (width as f64).powi(depth as i32 - 1) * b.powi(depth as i32)
}

/// Lipschitz constant of `θ -> φ_θ(x)` in the Euclidean parameter norm: `2W^L √L B^{L-1}`.
pub fn param_lipschitz(width: usize, depth: usize, b: f64) -> f64 {
    2.0 * (width as f64).powi(depth as i32) * (depth as f64).sqrt() * b.powi(depth as i32 - 1)
}

/// Lipschitz constant of `θ -> ∂φ_θ(x)/∂x_i`: `2 W^{2L-1} √L (L+1) B^{2L}`.
pub fn input_gradient_lipschitz(width: usize, depth: usize, b: f64) -> f64 {
    let l = depth as f64;
    2.0 * (width as f64).powi(2 * depth as i32 - 1) * l.sqrt() * (l + 1.0) * b.powi(2 * depth as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(value_bound(4, 2.0), 10.0);
        assert_eq!(input_gradient_bound(4, 3, 2.0), 128.0);
        assert_eq!(param_lipschitz(2, 4, 1.0), 64.0);
        assert_eq!(input_gradient_lipschitz(2, 1, 1.0), 8.0);
    }
}
