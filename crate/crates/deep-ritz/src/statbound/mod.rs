//! The closed-form statistical error bound and Monte Carlo lower estimates of the
//! generalization gap and the Rademacher complexity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{continuous_energy, EllipticProblem, EnergyEvaluator, QuadratureSpec, Reduction, SampleSet};
use crate::error::{invalid, Result};
use crate::netcore::{random_uniform, NetShape, ParallelNetwork};
use crate::rng::SplitRng;

/// A network class `PNN(m, M, {W, L, B_θ})` together with the sample size and confidence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub m: usize,
    #[serde(rename = "M")]
    pub coeff_l1: f64,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "L")]
    pub depth: usize,
    #[serde(rename = "B_theta")]
    pub weight_sup: f64,
    #[serde(rename = "N_s")]
    pub n_s: usize,
    pub xi: f64,
    pub d: usize,
}

impl ClassSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(invalid(format!("confidence ξ must lie in (0, 1), got {}", self.xi)));
        }
        if self.m == 0 || self.width == 0 || self.depth == 0 || self.n_s == 0 || self.d == 0 {
            return Err(invalid("m, W, L, N_s and d must be at least 1"));
        }
        if !(self.coeff_l1 >= 0.0 && self.weight_sup > 0.0) {
            return Err(invalid("M must be non-negative and B_θ positive"));
        }
        Ok(())
    }

    /// Shape of the networks in this class.
    pub fn shape(&self) -> Result<NetShape> {
        NetShape::new(self.m, self.width, self.depth, self.d)
    }
}

/// `C·M²·B_θ^{2L}·N_s^{−1/2}·(√log(B_θ W L N_s) + √log(1/ξ))`.
///
/// Logarithms below zero are clamped to zero. `m` does not enter.
pub fn statistical_bound(spec: &ClassSpec, constant: f64) -> Result<f64> {
    spec.validate()?;
    let n = spec.n_s as f64;
    let inner = (spec.weight_sup * spec.width as f64 * spec.depth as f64 * n).ln().max(0.0).sqrt();
    let conf = (1.0 / spec.xi).ln().max(0.0).sqrt();
    Ok(constant * spec.coeff_l1.powi(2) * spec.weight_sup.powi(2 * spec.depth as i32) / n.sqrt() * (inner + conf))
}

/// Coefficients uniform on the ℓ1 sphere of radius `radius`.
pub fn l1_sphere_point(dim: usize, radius: f64, rng: &mut SplitRng) -> Vec<f64> {
    // Normalized exponentials are uniform on the simplex; random signs fill the sphere.
    let e: Vec<f64> = (0..dim).map(|_| -rng.uniform_open().ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| rng.sign() * radius * v / total).collect()
}

/// A random member of the class: weights `U[−B_θ, B_θ]`, coefficients on the ℓ1 sphere of radius `M`.
pub fn sample_class_member(spec: &ClassSpec, rng: &mut SplitRng) -> Result<ParallelNetwork> {
    let mut net = random_uniform(spec.shape()?, spec.weight_sup, rng);
    net.set_coefficients(l1_sphere_point(spec.m, spec.coeff_l1, rng))?;
    Ok(net)
}

/// Per-trial record of [`empirical_gap`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    /// `max_t |L(u_t) − L̂_t(u_t)|`, a lower estimate of the expected sup.
    pub value: f64,
    pub trials: usize,
    /// Running maximum after each trial.
    pub running_max: Vec<f64>,
}

/// Largest `|L(u) − L̂(u)|` over `trials` random class members, each paired with a
/// fresh sample set of `N_s` interior and `N_s` boundary points.
///
/// `spec.n_s` is ignored in favor of `n_s`. Trials use split seeds and run in parallel.
pub fn empirical_gap(
    problem: &EllipticProblem,
    spec: &ClassSpec,
    n_s: usize,
    trials: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<GapEstimate> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let spec = ClassSpec { n_s, ..*spec };
    spec.validate()?;
    let root = SplitRng::new(seed);
    let n_b = if problem.neumann_g().is_zero() { 0 } else { n_s };
    let gaps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = root.split(2 * t as u64);
            let net = sample_class_member(&spec, &mut rng)?;
            let samples = SampleSet::draw(problem, n_s, n_b, root.split(2 * t as u64 + 1).seed())?;
            let lhat = EnergyEvaluator::new(problem, &samples)?.with_reduction(Reduction::Sequential).energy(&net)?;
            Ok((continuous_energy(&net, problem, quad)? - lhat).abs())
        })
        .collect::<Result<_>>()?;
    let running_max: Vec<f64> = gaps
        .iter()
        .scan(0.0f64, |m, &g| {
            *m = m.max(g);
            Some(*m)
        })
        .collect();
    Ok(GapEstimate { value: *running_max.last().expect("trials ≥ 1"), trials, running_max })
}

/// Monte Carlo Rademacher complexity of a finite family.
///
/// `family[f][k]` is the value of member `f` at point `X_k`. Each trial draws fresh
/// signs and takes `max_f (1/N) Σ_k σ_k family[f][k]`; trials are averaged.
pub fn empirical_rademacher(family: &[Vec<f64>], trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 || family.is_empty() {
        return Err(invalid("need a non-empty family and at least one trial"));
    }
    let n = family[0].len();
    if n == 0 || family.iter().any(|f| f.len() != n) {
        return Err(invalid("family members must share a non-empty point set"));
    }
    let root = SplitRng::new(seed);
    let total: f64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = root.split(t as u64);
            let sigma: Vec<f64> = (0..n).map(|_| rng.sign()).collect();
            family.iter().map(|f| f.iter().zip(&sigma).map(|(v, s)| v * s).sum::<f64>() / n as f64).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total / trials as f64)
}

/// Values of each network at each point, ready for [`empirical_rademacher`].
pub fn evaluate_family(nets: &[ParallelNetwork], points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    nets.iter().map(|net| points.iter().map(|x| net.forward(x)).collect()).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
