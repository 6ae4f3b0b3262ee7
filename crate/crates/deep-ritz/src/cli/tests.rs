use std::path::Path;

use super::*;
use crate::energy::ProblemConfig;
use crate::statbound::ClassSpec;

fn run_args(args: &[&str]) -> i32 {
    run(std::iter::once("deep-ritz").chain(args.iter().copied()))
}

fn small_config(dir: &Path, iterations: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::cosine_preset(1, iterations);
    c.net = NetConfig { m: 4, width: 3, depth: 2 };
    c.n_interior = 64;
    c.n_boundary = 8;
    c.pgd.lambda = 1e-2;
    c.output_dir = dir.join("out");
    c
}

fn write_config(dir: &Path, c: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(c).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn missing_config_is_a_config_error() {
    assert_eq!(run_args(&["solve", "--config", "/nonexistent/config.json"]), EXIT_CONFIG);
}

#[test]
fn unknown_flags_and_subcommands_are_config_errors() {
    assert_eq!(run_args(&["solve"]), EXIT_CONFIG);
    assert_eq!(run_args(&["frobnicate"]), EXIT_CONFIG);
    assert_eq!(run_args(&["--help"]), EXIT_OK);
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"problem\": {},\n  \"bogus\": 1\n}").unwrap();
    let err = load_experiment(&path).unwrap_err();
    assert_eq!(err.code, EXIT_CONFIG);
    assert!(err.message.contains("bad.json:2:"), "{}", err.message);
}

#[test]
fn invalid_values_are_rejected_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path(), 10);
    c.pgd.eta = -1.0;
    let path = write_config(dir.path(), &c);
    assert_eq!(run_args(&["solve", "--config", &path]), EXIT_CONFIG);
    assert!(!c.output_dir.exists());
}

#[test]
fn solve_is_reproducible_in_deterministic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_config(dir.path(), 50);
    let path = write_config(dir.path(), &c);
    let read = |name: &str| std::fs::read_to_string(c.output_dir.join(name)).unwrap();
    assert_eq!(run_args(&["solve", "--config", &path, "--deterministic"]), EXIT_OK);
    let (summary, history) = (read("summary.json"), read("history.csv"));
    assert_eq!(run_args(&["solve", "--config", &path, "--deterministic"]), EXIT_OK);
    assert_eq!(summary, read("summary.json"));
    assert_eq!(history, read("history.csv"));

    let s: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(s["energy_decreased"], true);
    assert!(s["final_energy"].as_f64().unwrap() < s["initial_energy"].as_f64().unwrap());
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines[0], "iter,energy,grad_norm,l2_slack,l1_slack,h1_error");
    let mut effective = c.clone();
    effective.pgd.deterministic = true;
    assert_eq!(*lines.last().unwrap(), format!("# config_sha256={}", effective.hash()));
    let (net, prov) = crate::netcore::ParallelNetwork::from_json_str(&read("checkpoint.json")).unwrap();
    assert_eq!(net.subnets().len(), 4);
    assert_eq!(prov.unwrap()["iteration"], 50);
}

#[test]
fn diverging_step_is_a_numeric_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config(dir.path(), 200);
    c.pgd.lambda = 1e300;
    c.pgd.eta = 1e300;
    c.pgd.zeta = 1e300;
    let path = write_config(dir.path(), &c);
    assert_eq!(run_args(&["solve", "--config", &path]), EXIT_NUMERIC);
}

#[test]
fn schedule_validates_mu() {
    assert_eq!(run_args(&["schedule", "--epsilon", "0.1", "--d", "3", "--n", "3", "--mu", "0.5", "--beta", "1"]), EXIT_OK);
    assert_eq!(run_args(&["schedule", "--epsilon", "0.1", "--d", "3", "--n", "3", "--mu", "1.0", "--beta", "1"]), EXIT_CONFIG);
}

#[test]
fn approx_writes_network_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run_args(&["approx", "--preset", "square", "--epsilon", "0.1", "--n", "3", "--d", "1", "--out", out]), EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("approx_report.json")).unwrap()).unwrap();
    assert!(report["measured_error"].as_f64().unwrap() <= 0.1);
    let (_, prov) =
        crate::netcore::ParallelNetwork::from_json_str(&std::fs::read_to_string(dir.path().join("approximant.json")).unwrap()).unwrap();
    assert_eq!(prov.unwrap()["construction"], "localized-taylor");
    assert_eq!(run_args(&["approx", "--preset", "nope", "--epsilon", "0.1", "--n", "3", "--d", "1", "--out", out]), EXIT_CONFIG);
}

#[test]
fn approx_over_capacity_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run_args(&["approx", "--preset", "cosine", "--epsilon", "1e-6", "--n", "3", "--d", "3", "--out", out]), EXIT_CAPACITY);
    assert!(!dir.path().join("approximant.json").exists());
}

#[test]
fn diagnose_reports_a_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_config(dir.path(), 30);
    let path = write_config(dir.path(), &c);
    assert_eq!(run_args(&["solve", "--config", &path, "--deterministic"]), EXIT_OK);
    let approx_dir = dir.path().join("approx");
    let ad = approx_dir.to_str().unwrap();
    assert_eq!(run_args(&["approx", "--preset", "cosine", "--epsilon", "0.3", "--n", "3", "--d", "1", "--out", ad]), EXIT_OK);
    let ckpt = c.output_dir.join("checkpoint.json");
    let apx = approx_dir.join("approximant.json");
    let out = dir.path().join("diag.json");
    let args = [
        "diagnose",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--approximant",
        apx.to_str().unwrap(),
        "--config",
        &path,
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(run_args(&args), EXIT_OK);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let d = &rep["decomposition"];
    assert_eq!(d["e_sta_label"], "measured");
    assert!(d["h1_sq_measured"].as_f64().unwrap() <= d["total_bound"].as_f64().unwrap());
    assert!(rep["matching"].is_object());
}

#[test]
fn statbench_writes_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("sweep.csv");
    let spec = StatbenchSpec {
        problem: Some(ProblemConfig::cosine(1)),
        class: ClassSpec { m: 2, coeff_l1: 1.0, width: 3, depth: 2, weight_sup: 1.0, n_s: 1, xi: 0.1, d: 1 },
        n_s: vec![50, 200],
        trials: 4,
        seed: 3,
        constant: 1.0,
        quadrature: None,
        output: output.clone(),
    };
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(run_args(&["statbench", "--spec", spec_path.to_str().unwrap()]), EXIT_OK);
    let text = std::fs::read_to_string(&output).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N_s,gap_estimate,bound_value,trials,seed");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("50,") && lines[2].starts_with("200,"));
    assert_eq!(lines[3], format!("# config_sha256={}", config_hash(&spec)));
}

#[test]
fn config_hash_tracks_content() {
    let a = ExperimentConfig::cosine_preset(1, 10);
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.seed += 1;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}
