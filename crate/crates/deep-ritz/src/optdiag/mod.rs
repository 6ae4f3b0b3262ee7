//! Diagnostics for the optimization error: matching initial sub-networks to a
//! target network, the transition network built from such a match, the
//! probability that a match exists, and the error decomposition of a trained net.

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{continuous_energy, empirical_energy, h1_error, EllipticProblem, QuadratureSpec, SampleSet};
use crate::error::{check_dim, invalid, Result};
use crate::netcore::{NetShape, ParallelNetwork};
use crate::pgd::{continue_training, initialize, PgdConfig, TrainState};

/// Outcome of [`match_initialization`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchReport {
    /// `indices[k][v]`: the `v`-th initial sub-network assigned to target `k`.
    pub indices: Vec<Vec<usize>>,
    pub delta_used: f64,
    /// Every target collected `R` distinct matches.
    pub success: bool,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Greedy first-fit matching of initial sub-network weight vectors to targets.
///
/// Targets are served in order; each takes the `R` lowest-index unused initial
/// vectors within sup-distance `δ`. If any target comes up short, the report is a
/// failure and carries the fallback assignment `s_{k,v} = kR + v`.
pub fn match_initialization(init: &[Vec<f64>], targets: &[Vec<f64>], r: usize, delta: f64) -> Result<MatchReport> {
    if r == 0 {
        return Err(invalid("R must be at least 1"));
    }
    if init.len() < targets.len() * r {
        return Err(invalid(format!("need m ≥ m̄R: {} < {}·{r}", init.len(), targets.len())));
    }
    if !(delta >= 0.0) {
        return Err(invalid("delta must be non-negative"));
    }
    let dim = init.first().map_or(0, Vec::len);
    for v in init.iter().chain(targets) {
        check_dim(dim, v.len())?;
    }
    let mut used = vec![false; init.len()];
    let mut indices = Vec::with_capacity(targets.len());
    let mut success = true;
    for t in targets {
        let mut got = Vec::with_capacity(r);
        for (i, w) in init.iter().enumerate() {
            if got.len() == r {
                break;
            }
            if !used[i] && sup_dist(w, t) <= delta {
                used[i] = true;
                got.push(i);
            }
        }
        if got.len() < r {
            success = false;
            break;
        }
        indices.push(got);
    }
    if !success {
        indices = (0..targets.len()).map(|k| (0..r).map(|v| k * r + v).collect()).collect();
    }
    Ok(MatchReport { indices, delta_used: delta, success })
}

/// Per-sub-network inner weight vectors in the aligned flat layout, padding included.
pub fn aligned_vectors(net: &ParallelNetwork) -> Vec<Vec<f64>> {
    let flat = net.flatten();
    let slots = net.shape().slots_per_subnet();
    flat.inner.chunks(slots).map(<[f64]>::to_vec).collect()
}

/// Transition network and its coefficient norms.
#[derive(Clone, Debug)]
pub struct Transition {
    pub net: ParallelNetwork,
    pub l1: f64,
    pub l2: f64,
}

/// Keeps the initial inner weights and places `c̄_k/R` on every slot matched to target `k`.
pub fn build_transition_network(init: &ParallelNetwork, m: &MatchReport, cbar: &[f64], r: usize) -> Result<Transition> {
    if !m.success {
        return Err(invalid("transition network needs a successful match"));
    }
    check_dim(m.indices.len(), cbar.len())?;
    let mut coeffs = vec![0.0; init.subnets().len()];
    for (k, slots) in m.indices.iter().enumerate() {
        check_dim(r, slots.len())?;
        for &s in slots {
            if s >= coeffs.len() {
                return Err(invalid(format!("matched index {s} out of range")));
            }
            coeffs[s] = cbar[k] / r as f64;
        }
    }
    let l1 = coeffs.iter().map(|c| c.abs()).sum();
    let l2 = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut net = init.clone();
    net.set_coefficients(coeffs)?;
    Ok(Transition { net, l1, l2 })
}

/// `1 − m̄R[1 − (δ/2B)^{W(W+1)L}]^Q`, clamped to `[0, 1]`.
pub fn event_probability_bound(m_bar: usize, r: usize, q: u64, delta: f64, b: f64, width: usize, depth: usize) -> Result<f64> {
    if !(delta >= 0.0 && b > 0.0 && delta <= 2.0 * b) {
        return Err(invalid("need 0 ≤ δ ≤ 2B"));
    }
    if q == 0 {
        return Err(invalid("Q must be at least 1"));
    }
    let expo = (width * (width + 1) * depth) as f64;
    let p = (delta / (2.0 * b)).powf(expo);
    // (1 − p)^Q through log1p keeps tiny p from rounding to zero.
    let miss = if p >= 1.0 { 0.0 } else { (q as f64 * (-p).ln_1p()).exp() };
    Ok((1.0 - (m_bar * r) as f64 * miss).clamp(0.0, 1.0))
}

/// How the statistical term of a decomposition was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "e_sta_label", content = "e_sta", rename_all = "snake_case")]
pub enum StaTerm {
    /// A closed-form bound on `sup |L − L̂|`, counted twice.
    Bound(f64),
    /// `|L − L̂|(u_A) + |L − L̂|(ū)`, measured.
    Measured(f64),
}

impl StaTerm {
    pub fn value(&self) -> f64 {
        match *self {
            StaTerm::Bound(v) => 2.0 * v,
            StaTerm::Measured(v) => v,
        }
    }
}

/// Error budget of a trained network against an approximant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub e_app: f64,
    pub e_opt_minus: f64,
    #[serde(flatten)]
    pub e_sta: StaTerm,
    pub total_bound: f64,
    /// `‖u_A − u₀‖²_{H¹}` measured by quadrature.
    pub h1_sq_measured: f64,
}

/// `|L(u) − L̂(u)|` for the given samples.
pub fn measured_gap(u: &ParallelNetwork, problem: &EllipticProblem, samples: &SampleSet, quad: &QuadratureSpec) -> Result<f64> {
    Ok((continuous_energy(u, problem, quad)? - empirical_energy(u, samples, problem)?).abs())
}

/// Measured statistical term `|L − L̂|(u_A) + |L − L̂|(ū)`.
pub fn measured_sta(
    u_a: &ParallelNetwork,
    u_bar: &ParallelNetwork,
    problem: &EllipticProblem,
    samples: &SampleSet,
    quad: &QuadratureSpec,
) -> Result<StaTerm> {
    Ok(StaTerm::Measured(measured_gap(u_a, problem, samples, quad)? + measured_gap(u_bar, problem, samples, quad)?))
}

/// Splits the error of `u_A` into approximation, optimization and statistical parts.
///
/// `E_app = (B₀∨1)/2·‖ū − u₀‖²_{H¹}`, `E_opt⁻ = L̂(u_A) − L̂(ū)` and
/// `total = 2/(c₀∧1)·(E_app + E_opt⁻ + E_sta)`.
pub fn error_decomposition(
    u_a: &ParallelNetwork,
    u_bar: &ParallelNetwork,
    problem: &EllipticProblem,
    samples: &SampleSet,
    e_sta: StaTerm,
    quad: &QuadratureSpec,
) -> Result<Decomposition> {
    if problem.exact_solution().is_none() {
        return Err(invalid("error decomposition needs the exact solution"));
    }
    let e_app = 0.5 * problem.b0().max(1.0) * h1_error(u_bar, problem, quad)?.powi(2);
    let e_opt_minus = empirical_energy(u_a, samples, problem)? - empirical_energy(u_bar, samples, problem)?;
    let total_bound = 2.0 / problem.c0().min(1.0) * (e_app + e_opt_minus + e_sta.value());
    let h1_sq_measured = h1_error(u_a, problem, quad)?.powi(2);
    Ok(Decomposition { e_app, e_opt_minus, e_sta, total_bound, h1_sq_measured })
}

/// Smallest empirical energy over `restarts` independently seeded training runs
/// plus runs warm-started from each of `warm`.
pub fn erm_ensemble_min(
    problem: &EllipticProblem,
    samples: &SampleSet,
    shape: NetShape,
    config: &PgdConfig,
    restarts: usize,
    warm: &[&ParallelNetwork],
) -> Result<f64> {
    let cold = (0..restarts).into_par_iter().map(|i| {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add(i as u64 + 1);
        cfg.log_every = None;
        cfg.h1_quadrature = None;
        let mut state = initialize(shape, cfg.b, cfg.seed);
        continue_training(&mut state, problem, &cfg, samples, cfg.iterations)?;
        empirical_energy(state.network(), samples, problem)
    });
    let hot = warm.par_iter().map(|net| {
        let mut cfg = config.clone();
        cfg.log_every = None;
        cfg.h1_quadrature = None;
        let mut state = TrainState::from_network((*net).clone());
        continue_training(&mut state, problem, &cfg, samples, cfg.iterations)?;
        let trained = empirical_energy(state.network(), samples, problem)?;
        Ok(trained.min(empirical_energy(net, samples, problem)?))
    });
    let all: Vec<f64> = cold.chain(hot).collect::<Result<Vec<_>>>()?;
    Ok(all.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests;
