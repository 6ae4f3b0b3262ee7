use serde::{Deserialize, Serialize};

use super::projection::{l1_norm, l2_distance, project_l1_ball_in_place, project_l2_ball_in_place};
use crate::energy::{h1_error, EllipticProblem, EnergyEvaluator, QuadratureSpec, Reduction, SampleSet};
use crate::error::{invalid, Error, Result};
use crate::netcore::{random_uniform, FlatParams, NetShape, ParallelNetwork};
use crate::rng::SplitRng;

/// Smallest accepted projection radius.
pub const MIN_RADIUS: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdConfig {
    /// Half-width of the uniform initialization law.
    #[serde(rename = "B")]
    pub b: f64,
    pub eta: f64,
    pub zeta: f64,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub iterations: usize,
    pub seed: u64,
    /// Defaults to `max(1, T/1000)`.
    #[serde(default)]
    pub log_every: Option<usize>,
    /// Quadrature for the H¹ column of the history; skipped when absent.
    #[serde(default)]
    pub h1_quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub deterministic: bool,
}

impl PgdConfig {
    pub fn new(b: f64, eta: f64, zeta: f64, lambda: f64, iterations: usize, seed: u64) -> Self {
        Self { b, eta, zeta, lambda, iterations, seed, log_every: None, h1_quadrature: None, deterministic: false }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("B", self.b), ("eta", self.eta), ("zeta", self.zeta), ("lambda", self.lambda)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if self.eta < MIN_RADIUS || self.zeta < MIN_RADIUS {
            return Err(invalid("projection radii below 1e-300 are not supported"));
        }
        if self.iterations == 0 {
            return Err(invalid("T must be at least 1"));
        }
        if self.log_every == Some(0) {
            return Err(invalid("log_every must be at least 1"));
        }
        Ok(())
    }

    pub fn log_every(&self) -> usize {
        self.log_every.unwrap_or((self.iterations / 1000).max(1))
    }

    fn reduction(&self) -> Reduction {
        if self.deterministic {
            Reduction::Sequential
        } else {
            Reduction::Parallel
        }
    }
}

/// One history row, describing the iterate `θ^[iter]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub l2_slack: f64,
    pub l1_slack: f64,
    pub h1_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainState {
    params: FlatParams,
    init_inner: Vec<f64>,
    net: ParallelNetwork,
    t: usize,
    history: Vec<HistoryRecord>,
}

impl TrainState {
    /// Starts from `net`, taking its inner weights as the projection center.
    pub fn from_network(net: ParallelNetwork) -> Self {
        let params = net.flatten();
        Self { init_inner: params.inner.clone(), params, net, t: 0, history: Vec::new() }
    }

    pub fn params(&self) -> &FlatParams {
        &self.params
    }

    pub fn init_inner_snapshot(&self) -> &[f64] {
        &self.init_inner
    }

    pub fn network(&self) -> &ParallelNetwork {
        &self.net
    }

    pub fn into_network(self) -> ParallelNetwork {
        self.net
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn history(&self) -> &[HistoryRecord] {
        &self.history
    }

    /// `η − ‖θ_in − θ_in^[0]‖₂`.
    pub fn l2_slack(&self, eta: f64) -> f64 {
        eta - l2_distance(&self.params.inner, &self.init_inner)
    }

    /// `ζ − ‖θ_out‖₁`.
    pub fn l1_slack(&self, zeta: f64) -> f64 {
        zeta - l1_norm(&self.params.outer)
    }
}

/// Zero outer coefficients and i.i.d. `U[−B, B]` inner weights.
pub fn initialize(shape: NetShape, b: f64, seed: u64) -> TrainState {
    let mut rng = SplitRng::new(seed);
    TrainState::from_network(random_uniform(shape, b, &mut rng))
}

/// One projected gradient step on a fixed sample set.
pub fn pgd_step(state: &mut TrainState, problem: &EllipticProblem, samples: &SampleSet, config: &PgdConfig) -> Result<()> {
    let eval = EnergyEvaluator::new(problem, samples)?.with_reduction(config.reduction());
    step(state, &eval, problem, config)
}

fn record(state: &TrainState, energy: f64, grad: &FlatParams, problem: &EllipticProblem, config: &PgdConfig) -> Result<HistoryRecord> {
    let h1 = match (&config.h1_quadrature, problem.exact_solution()) {
        (Some(q), Some(_)) => Some(h1_error(&state.net, problem, q)?),
        _ => None,
    };
    Ok(HistoryRecord {
        iter: state.t,
        energy,
        grad_norm: grad.norm2(),
        l2_slack: state.l2_slack(config.eta),
        l1_slack: state.l1_slack(config.zeta),
        h1_error: h1,
    })
}

fn check_radii(config: &PgdConfig) -> Result<()> {
    if !(config.eta >= MIN_RADIUS && config.zeta >= MIN_RADIUS) {
        return Err(invalid("projection radii must be at least 1e-300"));
    }
    if !(config.lambda >= 0.0 && config.lambda.is_finite()) {
        return Err(invalid("lambda must be finite and non-negative"));
    }
    Ok(())
}

fn step(state: &mut TrainState, eval: &EnergyEvaluator<'_>, problem: &EllipticProblem, config: &PgdConfig) -> Result<()> {
    check_radii(config)?;
    let (energy, grad) = eval.energy_and_gradient(&state.net)?;
    if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "gradient", index: i });
    }
    if state.t.is_multiple_of(config.log_every()) {
        let rec = record(state, energy, &grad, problem, config)?;
        state.history.push(rec);
    }
    state.params.axpy(-config.lambda, &grad);
    project_l2_ball_in_place(&mut state.params.inner, &state.init_inner, config.eta);
    project_l1_ball_in_place(&mut state.params.outer, config.zeta);
    state.net.load_flat(&state.params);
    state.t += 1;
    Ok(())
}

/// Initializes from `config` and runs `T` projected gradient steps; the last history row is `θ^[T]`.
pub fn train(problem: &EllipticProblem, shape: NetShape, config: &PgdConfig, samples: &SampleSet) -> Result<TrainState> {
    let mut state = initialize(shape, config.b, config.seed);
    continue_training(&mut state, problem, config, samples, config.iterations)?;
    Ok(state)
}

/// Runs `steps` more iterations from `state`, then logs the final iterate.
pub fn continue_training(
    state: &mut TrainState,
    problem: &EllipticProblem,
    config: &PgdConfig,
    samples: &SampleSet,
    steps: usize,
) -> Result<()> {
    let eval = EnergyEvaluator::new(problem, samples)?.with_reduction(config.reduction());
    for _ in 0..steps {
        step(state, &eval, problem, config)?;
    }
    if state.history.last().map(|r| r.iter) != Some(state.t) {
        let (energy, grad) = eval.energy_and_gradient(&state.net)?;
        let rec = record(state, energy, &grad, problem, config)?;
        state.history.push(rec);
    }
    Ok(())
}
