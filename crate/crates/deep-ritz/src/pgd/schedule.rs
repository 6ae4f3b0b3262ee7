use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Values of the unspecified universal constants; all default to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConstants {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C0_prime")]
    pub c0_prime: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        Self { c: 1.0, c0: 1.0, c0_prime: 1.0 }
    }
}

/// Largest `m`, `T` or `N_s` considered executable.
pub const EXECUTION_LIMIT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub m: bool,
    #[serde(rename = "T")]
    pub iterations: bool,
    #[serde(rename = "N_s")]
    pub samples: bool,
    pub lambda: bool,
    pub overall: bool,
}

/// Hyperparameters prescribed for a target accuracy `ε`. Counts are kept as `f64`
/// because they overflow integer types for small `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub epsilon: f64,
    pub d: usize,
    pub n: f64,
    pub mu: f64,
    pub m: f64,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "L")]
    pub depth: usize,
    #[serde(rename = "B")]
    pub b: f64,
    pub eta: f64,
    pub zeta: f64,
    #[serde(rename = "T")]
    pub iterations: f64,
    pub lambda: f64,
    #[serde(rename = "N_s")]
    pub n_samples: f64,
    pub beta: f64,
    pub beta0: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    pub constants: ScheduleConstants,
    pub feasible: Feasibility,
}

/// `⌈log₂ k⌉` for `k ≥ 1`.
pub fn ceil_log2(k: usize) -> u32 {
    assert!(k >= 1);
    usize::BITS - (k - 1).leading_zeros()
}

/// Width `2^{⌈log₂(d+1)⌉+1}` and depth `⌈log₂(d+1)⌉+2`.
pub fn width_depth(d: usize) -> (usize, usize) {
    let k = ceil_log2(d + 1);
    (1usize << (k + 1), k as usize + 2)
}

/// Evaluates the schedule. Logarithms in the exponents are natural.
pub fn schedule(epsilon: f64, d: usize, n: f64, mu: f64, beta: f64, constants: ScheduleConstants) -> Result<ScheduleParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon must lie in (0, 1)"));
    }
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    if !(n >= 2.0) {
        return Err(invalid("n must be at least 2"));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(invalid("mu must lie in (0, 1)"));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    let gap = n - mu - 1.0;
    if gap <= 0.0 {
        return Err(invalid("n - mu - 1 must be positive"));
    }
    let df = d as f64;
    let lg = (df + 1.0).ln();
    let beta0 = beta.max(2.0 + 2.0 * df / gap);
    let cubic = df.powi(3) * lg * lg / gap;
    let c1 = constants.c0 * cubic + 11.0 * beta0 * lg + 33.0 * beta0 + 3.0 * beta;
    let c2 = constants.c0_prime * cubic + 15.0 * beta0 * lg + 45.0 * beta0 + 3.0 * beta;
    let c3 = 4.0 * beta0 * lg + 6.0 * df / gap + 12.0 * beta0 + 2.0;
    let c = constants.c;
    let (width, depth) = width_depth(d);
    let m = (c * epsilon.powf(-c1)).ceil();
    let iterations = c * epsilon.powf(-c2);
    let lambda = c * epsilon.powf(c2);
    let n_samples = (c * epsilon.powf(-c3)).ceil();
    let feasible = {
        let m_ok = m.is_finite() && m <= EXECUTION_LIMIT;
        let t_ok = iterations.is_finite() && iterations <= EXECUTION_LIMIT;
        let n_ok = n_samples.is_finite() && n_samples <= EXECUTION_LIMIT;
        let l_ok = lambda >= 1e-12;
        Feasibility { m: m_ok, iterations: t_ok, samples: n_ok, lambda: l_ok, overall: m_ok && t_ok && n_ok && l_ok }
    };
    Ok(ScheduleParams {
        epsilon,
        d,
        n,
        mu,
        m,
        width,
        depth,
        b: c * epsilon.powf(-2.0 - 2.0 * df / gap),
        eta: epsilon.powf(-beta),
        zeta: c * epsilon.powf(-3.0 * df / (2.0 * gap)),
        iterations,
        lambda,
        n_samples,
        beta,
        beta0,
        c1,
        c2,
        c3,
        constants,
        feasible,
    })
}

/// Inputs of the theoretical step-size rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    #[serde(rename = "T")]
    pub iterations: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub m: f64,
    #[serde(rename = "M_bar")]
    pub m_bar: f64,
    #[serde(rename = "B_bar")]
    pub b_bar: f64,
    pub eta: f64,
    #[serde(rename = "L_bar")]
    pub l_bar: usize,
}

impl StepRule {
    /// `(1/T, 2 C₂⁻¹ m⁻¹ M̄⁻² (B̄+η)^{−4L̄})`.
    pub fn branches(&self) -> (f64, f64) {
        let second = 2.0 / (self.c2 * self.m * self.m_bar * self.m_bar) * (self.b_bar + self.eta).powi(-4 * self.l_bar as i32);
        (1.0 / self.iterations, second)
    }

    pub fn lambda(&self) -> f64 {
        let (a, b) = self.branches();
        clamp_step(a.min(b))
    }
}

/// Clamps a step size to `[1e−12, 1]`.
pub fn clamp_step(lambda_raw: f64) -> f64 {
    assert!(lambda_raw.is_finite() || lambda_raw == f64::INFINITY, "step size must not be NaN");
    lambda_raw.clamp(1e-12, 1.0)
}
