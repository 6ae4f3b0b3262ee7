//! The localized-Taylor approximant `Σ_{m,α} c_{f,m,α} Ψ_m^s(x) x^α` as a parallel network.

use rayon::prelude::*;

use super::builders::{calibrate, tree_levels, Calibrated};
use super::bump::{bump_op, psi, BumpSpec};
use super::circuit::{Circuit, Gadget, Node, Op};
use super::measure::measure_sobolev_error_on;
use super::taylor::{monomial, multi_indices, taylor_coefficients, TaylorPatch};
use super::DEFAULT_X0;
use crate::energy::{Field, FieldFn, FnEval};
use crate::error::{invalid, Error, Result};
use crate::netcore::{ParallelNetwork, SubNetwork};

/// Knobs of [`assemble_approximant_with`].
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ApproxOptions {
    /// Sharpness exponent, `s = N^μ`.
    pub mu: f64,
    /// Constant in `N = ⌈(ε/2C)^{−1/(n−1−μ)}⌉`.
    pub grid_constant: f64,
    /// Largest allowed sub-network count.
    pub cap: usize,
    /// Fraction of `ε` the network error is calibrated to.
    pub safety: f64,
    /// Grid points per axis for error measurement; `None` picks by dimension.
    pub resolution: Option<usize>,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self { mu: 0.5, grid_constant: 1.0, cap: 100_000, safety: 0.9, resolution: None }
    }
}

/// Sizes, budgets and measured errors of an assembled approximant.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ApproxReport {
    pub epsilon: f64,
    pub n: usize,
    pub d: usize,
    pub p: f64,
    #[serde(rename = "N")]
    pub grid: usize,
    pub s: f64,
    pub m_bar: usize,
    pub alpha_count: usize,
    pub width: usize,
    pub depth: usize,
    /// `Σ |c|`.
    #[serde(rename = "M_bar")]
    pub coeff_l1: f64,
    /// Largest inner weight.
    #[serde(rename = "B_theta_bar")]
    pub max_weight: f64,
    /// `W^{1,∞}` grid error of the exact bump-Taylor sum `f_N`.
    pub taylor_error: f64,
    /// `W^{1,∞}` grid error of the network.
    pub measured_error: f64,
    /// Calibrated difference-step constant of the product gadgets.
    pub calibrated_constant: f64,
    pub resolution: usize,
}

#[derive(Clone, Debug)]
pub struct Approximant {
    pub net: ParallelNetwork,
    pub report: ApproxReport,
}

impl Approximant {
    /// Provenance block stored next to the serialized network.
    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "construction": "localized-taylor",
            "epsilon": self.report.epsilon,
            "N": self.report.grid,
            "s": self.report.s,
            "calibrated_constants": { "product_step": self.report.calibrated_constant },
            "report": self.report,
        })
    }
}

/// Default measurement resolution per axis.
pub fn default_resolution(d: usize) -> usize {
    match d {
        1 => 2001,
        2 => 101,
        3 => 21,
        _ => 7,
    }
}

/// Grid size `N` from the target error, before measured refinement.
pub fn initial_grid(epsilon: f64, n: usize, options: &ApproxOptions) -> Result<usize> {
    let expo = n as f64 - 1.0 - options.mu;
    if expo <= 0.0 {
        return Err(invalid(format!("need n − 1 − μ > 0, got n = {n}, μ = {}", options.mu)));
    }
    let v = (epsilon / (2.0 * options.grid_constant)).powf(-1.0 / expo).ceil();
    Ok(v.max(1.0) as usize)
}

/// Depth of the product tree that every patch network is padded to.
pub fn patch_levels(d: usize, n: usize) -> usize {
    tree_levels(d + n - 1)
}

/// Network for `Ψ_m^s(x)·x^α`: a bump/identity first layer, then a product tree of `2^levels` leaves.
pub(crate) fn patch_net(spec: &BumpSpec, alpha: &[usize], g: Gadget, levels: usize, width: usize) -> Result<SubNetwork> {
    let d = spec.dim();
    let mut c = Circuit::new(d);
    let inputs = c.inputs();
    let mut ops: Vec<Op> = (0..d).map(|l| bump_op(spec, l, inputs[l].clone())).collect();
    let mut ident = vec![None; d];
    for i in 0..d {
        if alpha[i] > 0 {
            ident[i] = Some(ops.len());
            ops.push(Op::Identity(inputs[i].clone(), g.h));
        }
    }
    let first = c.level(&ops);
    let mut leaves: Vec<Node> = first[..d].to_vec();
    for i in 0..d {
        if let Some(j) = ident[i] {
            leaves.extend(std::iter::repeat_n(first[j].clone(), alpha[i]));
        }
    }
    if leaves.len() > 1 << levels {
        return Err(invalid("monomial degree exceeds the padded tree"));
    }
    leaves.resize(1 << levels, Node::constant(1.0));
    let root = c.product_tree(leaves, g);
    c.finish(&root, width)
}

/// `f_N(x) = Σ_m Ψ_m^s(x) p_{f,m}(x)` and its gradient, with exact bumps and polynomials.
pub fn bump_taylor_sum(patches: &[TaylorPatch], grid: usize, s: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let d = x.len();
    let nf = grid as f64;
    let dpsi = |t: f64| {
        let a = (s * (t + 1.5)).tanh();
        let b = (s * (t - 1.5)).tanh();
        0.5 * s * ((1.0 - a * a) - (1.0 - b * b))
    };
    let mut v = 0.0;
    let mut g = vec![0.0; d];
    for patch in patches {
        let t: Vec<f64> = (0..d).map(|l| 3.0 * nf * (x[l] - patch.m_index[l] as f64 / nf)).collect();
        let vals: Vec<f64> = t.iter().map(|&tl| psi(s, tl)).collect();
        let bump: f64 = vals.iter().product();
        if bump == 0.0 && vals.iter().all(|&p| p.abs() < 1e-300) {
            continue;
        }
        let p = patch.eval(x);
        v += bump * p;
        for i in 0..d {
            let others: f64 = (0..d).filter(|&l| l != i).map(|l| vals[l]).product();
            let dbump = others * 3.0 * nf * dpsi(t[i]);
            let dp: f64 = patch
                .coefficients
                .iter()
                .filter(|(a, _)| a[i] > 0)
                .map(|(a, c)| {
                    let mut b = a.clone();
                    b[i] -= 1;
                    c * a[i] as f64 * monomial(&b, x)
                })
                .sum();
            g[i] += dbump * p + bump * dp;
        }
    }
    (v, g)
}

/// [`assemble_approximant_with`] under default options.
pub fn assemble_approximant(f: &Field, epsilon: f64, n: usize, d: usize, p: f64) -> Result<Approximant> {
    assemble_approximant_with(f, epsilon, n, d, p, &ApproxOptions::default())
}

/// Builds the approximant so its measured `W^{1,∞}([0,1]^d)` error is at most `ε`.
///
/// `N` starts from the closed-form choice and grows until the exact bump-Taylor sum is
/// within `ε/2`; the product gadgets are then calibrated so the network is within
/// `safety·ε`. Refuses with [`Error::Capacity`] once `(N+1)^d·#α` exceeds the cap.
pub fn assemble_approximant_with(f: &Field, epsilon: f64, n: usize, d: usize, p: f64, options: &ApproxOptions) -> Result<Approximant> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if n < 2 || d == 0 {
        return Err(invalid("need n ≥ 2 and d ≥ 1"));
    }
    if !(p >= 1.0) {
        return Err(invalid("Sobolev exponent p must be at least 1"));
    }
    if !f.has_derivatives() {
        return Err(invalid("the target field must supply a gradient"));
    }
    let alphas = multi_indices(d, n - 1);
    let res = options.resolution.unwrap_or_else(|| default_resolution(d));
    let target = FieldFn(f, d);
    let count = |grid: usize| (grid + 1).checked_pow(d as u32).and_then(|v| v.checked_mul(alphas.len())).unwrap_or(usize::MAX);

    let mut grid = initial_grid(epsilon, n, options)?;
    let (patches, s, taylor_error) = loop {
        let required = count(grid);
        if required > options.cap {
            return Err(Error::Capacity { required, cap: options.cap });
        }
        let s = (grid as f64).powf(options.mu).max(1.0);
        let patches = taylor_coefficients(f, grid, n, d)?;
        let ideal = FnEval(d, |x: &[f64]| bump_taylor_sum(&patches, grid, s, x));
        let e = measure_sobolev_error_on(&target, &ideal, 1, res, 0.0, 1.0);
        if e <= 0.5 * epsilon {
            break (patches, s, e);
        }
        grid = (grid + 1).max((grid as f64 * 1.25).ceil() as usize);
    };

    let levels = patch_levels(d, n);
    let width = 2usize << levels;
    let specs: Vec<(BumpSpec, &Vec<usize>, f64)> = patches
        .iter()
        .flat_map(|patch| {
            patch.coefficients.iter().map(move |(alpha, c)| (BumpSpec { n: grid, s, m_index: patch.m_index.clone() }, alpha, *c))
        })
        .collect();
    let coefficients: Vec<f64> = specs.iter().map(|t| t.2).collect();
    let build = |c_cal: f64| -> Result<ParallelNetwork> {
        let g = Gadget::new(epsilon / c_cal, DEFAULT_X0)?;
        let subnets = specs.par_iter().map(|(spec, alpha, _)| patch_net(spec, alpha, g, levels, width)).collect::<Result<Vec<_>>>()?;
        ParallelNetwork::new(subnets, coefficients.clone())
    };
    let Calibrated { net, constant, measured_error, .. } = if coefficients.iter().all(|&c| c == 0.0) {
        let net = build(1.0)?;
        let e = measure_sobolev_error_on(&target, &net, 1, res, 0.0, 1.0);
        Calibrated { net, constant: 1.0, measured_error: e, target: 0.0, evaluations: 1 }
    } else {
        calibrate(options.safety * epsilon, build, |net| measure_sobolev_error_on(&target, net, 1, res, 0.0, 1.0))?
    };
    let report = ApproxReport {
        epsilon,
        n,
        d,
        p,
        grid,
        s,
        m_bar: net.subnets().len(),
        alpha_count: alphas.len(),
        width,
        depth: levels + 2,
        coeff_l1: net.coeff_l1(),
        max_weight: net.max_abs_weight(),
        taylor_error,
        measured_error,
        calibrated_constant: constant,
        resolution: res,
    };
    Ok(Approximant { net, report })
}
