use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{config_hash, load_experiment, load_json};
use super::Failure;
use crate::approxnet::assemble_approximant;
use crate::energy::{h1_error, h1_norm, EllipticProblem, Field, FieldFn, ProblemConfig, QuadratureSpec, SampleSet};
use crate::netcore::ParallelNetwork;
use crate::optdiag::{aligned_vectors, error_decomposition, event_probability_bound, match_initialization, measured_sta, StaTerm};
use crate::pgd::{initialize, train, HistoryRecord, ScheduleConstants};
use crate::statbound::{empirical_gap, loglog_slope, statistical_bound, ClassSpec};

type Outcome<T = ()> = Result<T, Failure>;

/// Names accepted by `approx --preset`.
pub const APPROX_PRESETS: [&str; 4] = ["zero", "square", "cubic", "cosine"];

/// `zero`: `0`; `square`: `x₁²`; `cubic`: `x₁³`; `cosine`: `Π cos(π x_i)`.
pub fn approx_preset(name: &str, d: usize) -> Option<Field> {
    let first = |p: u32| (0..d).map(|i| if i == 0 { p } else { 0 }).collect::<Vec<u32>>();
    match name {
        "zero" => Some(Field::constant(0.0)),
        "square" => Some(Field::monomial(1.0, first(2))),
        "cubic" => Some(Field::monomial(1.0, first(3))),
        "cosine" => Some(Field::cosine_pi(d)),
        _ => None,
    }
}

/// Header row, data rows, then `# config_sha256=<hash>`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], hash: &str) -> std::io::Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    writeln!(text, "# config_sha256={hash}").expect("writing to a String");
    std::fs::write(path, text)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    std::fs::write(path, text + "\n").map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// Pretty JSON on stdout; a closed pipe is not an error.
fn print_json<T: Serialize>(value: &T) {
    use std::io::Write as _;
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::config(format!("{}: {e}", path.display()))
}

fn history_row(r: &HistoryRecord) -> Vec<String> {
    vec![
        r.iter.to_string(),
        r.energy.to_string(),
        r.grad_norm.to_string(),
        r.l2_slack.to_string(),
        r.l1_slack.to_string(),
        r.h1_error.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

fn relative_h1(net: &ParallelNetwork, problem: &EllipticProblem, quad: &QuadratureSpec) -> crate::Result<Option<(f64, f64)>> {
    let Some(u0) = problem.exact_solution() else {
        return Ok(None);
    };
    let err = h1_error(net, problem, quad)?;
    Ok(Some((err, err / h1_norm(&FieldFn(u0, problem.dim()), problem, quad)?)))
}

pub(super) fn solve(path: &Path, deterministic: bool) -> Outcome {
    let (mut config, exp) = load_experiment(path)?;
    config.pgd.deterministic |= deterministic;
    let hash = config.hash();
    let samples = SampleSet::draw(&exp.problem, config.n_interior, config.n_boundary, config.seed)?;
    let state = train(&exp.problem, exp.shape, &config.pgd, &samples)?;

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let history = state.history();
    let rows: Vec<Vec<String>> = history.iter().map(history_row).collect();
    let csv = dir.join("history.csv");
    write_csv(&csv, &["iter", "energy", "grad_norm", "l2_slack", "l1_slack", "h1_error"], &rows, &hash).map_err(io(&csv))?;

    let provenance = json!({ "iteration": state.iteration(), "init_seed": config.pgd.seed, "config_sha256": hash });
    write_json(&dir.join("checkpoint.json"), &state.network().to_json(Some(provenance)))?;

    let (first, last) = (history.first().expect("history is never empty"), history.last().expect("history is never empty"));
    let h1 = relative_h1(state.network(), &exp.problem, &exp.quadrature)?;
    let summary = json!({
        "config_sha256": hash,
        "iterations": state.iteration(),
        "initial_energy": first.energy,
        "final_energy": last.energy,
        "energy_decreased": last.energy < first.energy,
        "h1_error": h1.map(|v| v.0),
        "relative_h1_error": h1.map(|v| v.1),
        "l2_slack": last.l2_slack,
        "l1_slack": last.l1_slack,
        "deterministic": config.pgd.deterministic,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    print_json(&summary);
    Ok(())
}

pub(super) fn schedule(epsilon: f64, d: usize, n: f64, mu: f64, beta: f64) -> Outcome {
    let params = crate::pgd::schedule(epsilon, d, n, mu, beta, ScheduleConstants::default())?;
    print_json(&params);
    Ok(())
}

pub(super) fn approx(preset: &str, epsilon: f64, n: usize, d: usize, p: f64, out: &Path) -> Outcome {
    let f = approx_preset(preset, d)
        .ok_or_else(|| Failure::config(format!("unknown preset {preset:?}; expected one of {APPROX_PRESETS:?}")))?;
    let approx = assemble_approximant(&f, epsilon, n, d, p)?;
    std::fs::create_dir_all(out).map_err(io(out))?;
    write_json(&out.join("approximant.json"), &approx.net.to_json(Some(approx.provenance())))?;
    let report = serde_json::to_value(&approx.report).expect("report serializes");
    write_json(&out.join("approx_report.json"), &report)?;
    print_json(&report);
    Ok(())
}

fn load_net(path: &Path) -> Outcome<ParallelNetwork> {
    let value: serde_json::Value = load_json(path)?;
    let (net, _) = ParallelNetwork::from_json(&value).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    Ok(net)
}

#[allow(clippy::too_many_arguments)]
pub(super) fn diagnose(
    checkpoint: &Path,
    approximant: &Path,
    config_path: &Path,
    delta: f64,
    r: usize,
    sta_bound: Option<f64>,
    out: Option<&Path>,
) -> Outcome {
    let (config, exp) = load_experiment(config_path)?;
    let u_a = load_net(checkpoint)?;
    let u_bar = load_net(approximant)?;
    if u_a.input_dim() != exp.problem.dim() || u_bar.input_dim() != exp.problem.dim() {
        return Err(Failure::config("checkpoint, approximant and problem must share the input dimension"));
    }
    let samples = SampleSet::draw(&exp.problem, config.n_interior, config.n_boundary, config.seed)?;
    let e_sta = match sta_bound {
        Some(v) => StaTerm::Bound(v),
        None => measured_sta(&u_a, &u_bar, &exp.problem, &samples, &exp.quadrature)?,
    };
    let decomposition = error_decomposition(&u_a, &u_bar, &exp.problem, &samples, e_sta, &exp.quadrature)?;

    let init = initialize(exp.shape, config.pgd.b, config.pgd.seed);
    let init_vectors = aligned_vectors(init.network());
    let targets = aligned_vectors(&u_bar);
    let m_bar = targets.len();
    let matching = if u_bar.shape().slots_per_subnet() != exp.shape.slots_per_subnet() {
        json!({ "skipped": "approximant sub-networks have a different shape than the trained ones" })
    } else if exp.shape.m < m_bar * r {
        json!({ "skipped": format!("need m >= m_bar * R = {}", m_bar * r) })
    } else {
        let report = match_initialization(&init_vectors, &targets, r, delta)?;
        let q = (exp.shape.m / (m_bar * r)) as u64;
        let shape = u_bar.shape();
        let bound = event_probability_bound(m_bar, r, q, delta.min(2.0 * config.pgd.b), config.pgd.b, shape.width, shape.depth)?;
        json!({ "report": report, "Q": q, "event_probability_bound": bound })
    };
    let report = json!({
        "config_sha256": config.hash(),
        "decomposition": decomposition,
        "matching": matching,
    });
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.join("diagnose.json"));
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    write_json(&path, &report)?;
    print_json(&report);
    Ok(())
}

/// Input of `statbench`: a class, a list of sample sizes and the sweep settings.
///
/// `class.N_s` is replaced by each entry of `n_s` in turn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatbenchSpec {
    /// Defaults to the cosine problem in `class.d` dimensions.
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    pub class: ClassSpec,
    pub n_s: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "unit_constant")]
    pub constant: f64,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default = "default_statbench_output")]
    pub output: std::path::PathBuf,
}

fn unit_constant() -> f64 {
    1.0
}

fn default_statbench_output() -> std::path::PathBuf {
    "statbench.csv".into()
}

pub(super) fn statbench(path: &Path) -> Outcome {
    let spec: StatbenchSpec = load_json(path)?;
    let bad = |e: crate::Error| Failure::config(format!("{}: {e}", path.display()));
    if spec.n_s.is_empty() {
        return Err(Failure::config(format!("{}: n_s must list at least one sample size", path.display())));
    }
    let problem = spec.problem.clone().unwrap_or_else(|| ProblemConfig::cosine(spec.class.d)).build().map_err(bad)?;
    if problem.dim() != spec.class.d {
        return Err(Failure::config(format!("{}: class.d differs from the problem dimension", path.display())));
    }
    let quad = spec.quadrature.unwrap_or_else(|| QuadratureSpec::default_for(problem.dim()));
    quad.validate(problem.dim()).map_err(bad)?;
    let mut rows = Vec::with_capacity(spec.n_s.len());
    let mut gaps = Vec::with_capacity(spec.n_s.len());
    for &n in &spec.n_s {
        let class = ClassSpec { n_s: n, ..spec.class };
        let bound = statistical_bound(&class, spec.constant).map_err(bad)?;
        let gap = empirical_gap(&problem, &class, n, spec.trials, spec.seed, &quad)?;
        gaps.push(gap.value);
        rows.push(vec![n.to_string(), gap.value.to_string(), bound.to_string(), spec.trials.to_string(), spec.seed.to_string()]);
    }
    write_csv(&spec.output, &["N_s", "gap_estimate", "bound_value", "trials", "seed"], &rows, &config_hash(&spec))
        .map_err(io(&spec.output))?;
    let xs: Vec<f64> = spec.n_s.iter().map(|&n| n as f64).collect();
    let slope = (xs.len() >= 2).then(|| loglog_slope(&xs, &gaps));
    print_json(&json!({ "output": spec.output, "slope": slope, "gaps": gaps }));
    Ok(())
}
