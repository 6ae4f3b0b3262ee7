//! Square, product and monomial networks with measured-error calibration.

use super::circuit::{Circuit, Gadget, Node, Op};
use super::measure::measure_sobolev_error_on;
use crate::energy::FnEval;
use crate::error::{invalid, Result};
use crate::netcore::SubNetwork;

/// Default expansion point; `tanh` has nonzero first three derivatives there.
pub const DEFAULT_X0: f64 = 0.5;

/// Outcome of a calibration bisection.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Calibrated<T = SubNetwork> {
    #[serde(skip)]
    pub net: T,
    /// Constant `C` with difference step `ε/C`.
    pub constant: f64,
    /// Measured `W^{1,∞}` grid error of `net`.
    pub measured_error: f64,
    /// Error the bisection aimed for.
    pub target: f64,
    pub evaluations: usize,
}

/// Smallest `C` (up to bisection tolerance) whose build meets `target`.
///
/// `err(C)` is assumed to decrease in `C` until rounding takes over.
pub(crate) fn calibrate<T>(target: f64, mut build: impl FnMut(f64) -> Result<T>, mut err: impl FnMut(&T) -> f64) -> Result<Calibrated<T>> {
    let evaluations = std::cell::Cell::new(0);
    let mut probe = |c: f64| -> Result<(T, f64)> {
        evaluations.set(evaluations.get() + 1);
        let net = build(c)?;
        let e = err(&net);
        Ok((net, e))
    };
    let mut lo = 1e-3;
    let (mut net, mut e) = probe(lo)?;
    if e <= target {
        return Ok(Calibrated { net, constant: lo, measured_error: e, target, evaluations: evaluations.get() });
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(invalid(format!("calibration cannot reach error {target:e}; best {e:e}")));
        }
        let (n, eh) = probe(hi)?;
        if eh <= target {
            net = n;
            e = eh;
            break;
        }
        lo = hi;
    }
    for _ in 0..24 {
        let mid = (lo * hi).sqrt();
        let (n, em) = probe(mid)?;
        if em <= target {
            hi = mid;
            net = n;
            e = em;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-4 {
            break;
        }
    }
    Ok(Calibrated { net, constant: hi, measured_error: e, target, evaluations: evaluations.get() })
}

fn check_eps(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Width-2 depth-2 network for `x²` with difference step `ε/C`.
///
/// Realizes `K[ρ(x0 + hx) − 2ρ(x0) + ρ(x0 − hx)]` with `K = 1/(ρ''(x0)h²)`, which is
/// exactly zero at `x = 0`.
pub fn build_square_net(epsilon: f64, x0: f64, c_cal: f64) -> Result<SubNetwork> {
    check_eps(epsilon)?;
    if !(c_cal > 0.0) {
        return Err(invalid("calibration constant must be positive"));
    }
    let g = Gadget::new(epsilon / c_cal, x0)?;
    let mut c = Circuit::new(1);
    let out = c.level(&[Op::Square(Node::unit(0), g)]);
    c.finish(&out[0], 2)
}

/// [`build_square_net`] with `C` chosen so the `W^{1,∞}([0,1])` error on a 10⁴-point grid is at most `ε`.
pub fn calibrate_square_net(epsilon: f64, x0: f64) -> Result<Calibrated> {
    check_eps(epsilon)?;
    let f = FnEval(1, |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]));
    calibrate(epsilon, |c| build_square_net(epsilon, x0, c), |net| measure_sobolev_error_on(&f, net, 1, 10_000, 0.0, 1.0))
}

pub(crate) fn product_net_with(epsilon: f64, a: f64, b: f64, c_cal: f64, x0: f64) -> Result<SubNetwork> {
    let g = Gadget::new(epsilon / c_cal, x0)?;
    let mut c = Circuit::new(2);
    let out = c.level(&[Op::Product { u: Node::unit(0), v: Node::unit(1), g, a, b }]);
    c.finish(&out[0], 4)
}

fn check_interval(epsilon: f64, a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("interval [{a}, {b}] is empty or reversed")));
    }
    if !(epsilon > 0.0 && epsilon * (b - a) * (b - a) < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, (b−a)^−2), got {epsilon}")));
    }
    Ok(())
}

/// Width-4 depth-2 network for `xy` on `[a, b]²`, calibrated to error `(b−a)²ε`.
pub fn build_product_net(epsilon: f64, a: f64, b: f64) -> Result<SubNetwork> {
    Ok(calibrate_product_net(epsilon, a, b)?.net)
}

/// As [`build_product_net`], with the calibration record.
pub fn calibrate_product_net(epsilon: f64, a: f64, b: f64) -> Result<Calibrated> {
    check_interval(epsilon, a, b)?;
    let f = FnEval(2, |x: &[f64]| (x[0] * x[1], vec![x[1], x[0]]));
    let w = b - a;
    calibrate(w * w * epsilon, |c| product_net_with(epsilon, a, b, c, DEFAULT_X0), |net| measure_sobolev_error_on(&f, net, 1, 101, a, b))
}

/// `⌈log₂ d⌉`.
pub fn tree_levels(d: usize) -> usize {
    d.next_power_of_two().trailing_zeros() as usize
}

/// Error amplification allowed for the `d`-fold product tree: `4^{⌈log₂ d⌉ − 1}`.
pub fn monomial_constant(d: usize) -> f64 {
    4f64.powi(tree_levels(d).max(1) as i32 - 1)
}

pub(crate) fn monomial_net_with(epsilon: f64, d: usize, c_cal: f64) -> Result<SubNetwork> {
    let g = Gadget::new(epsilon / c_cal, DEFAULT_X0)?;
    let mut c = Circuit::new(d);
    let leaves = c.inputs();
    let root = c.product_tree(leaves, g);
    c.finish(&root, 2 << tree_levels(d))
}

/// Grid points per axis used when measuring `d`-variate products.
pub(crate) fn monomial_resolution(d: usize) -> usize {
    match d {
        2 => 101,
        _ => ((20_000f64).powf(1.0 / d as f64).floor() as usize).max(3),
    }
}

/// Product tree for `x₁⋯x_d` on `[0,1]^d`, width `2^{⌈log₂ d⌉+1}`, depth `⌈log₂ d⌉+1`.
///
/// Missing leaves are constant ones. Calibrated to measured error `4^{⌈log₂ d⌉−1}·ε`.
pub fn build_monomial_net(epsilon: f64, d: usize) -> Result<SubNetwork> {
    Ok(calibrate_monomial_net(epsilon, d)?.net)
}

/// As [`build_monomial_net`], with the calibration record.
pub fn calibrate_monomial_net(epsilon: f64, d: usize) -> Result<Calibrated> {
    if d < 2 {
        return Err(invalid("monomial networks need d ≥ 2"));
    }
    if d == 2 {
        return calibrate_product_net(epsilon, 0.0, 1.0);
    }
    check_eps(epsilon)?;
    let f = FnEval(d, |x: &[f64]| {
        let grad = (0..x.len()).map(|i| x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product()).collect();
        (x.iter().product(), grad)
    });
    let res = monomial_resolution(d);
    calibrate(
        monomial_constant(d) * epsilon,
        |c| monomial_net_with(epsilon, d, c),
        |net| measure_sobolev_error_on(&f, net, 1, res, 0.0, 1.0),
    )
}
