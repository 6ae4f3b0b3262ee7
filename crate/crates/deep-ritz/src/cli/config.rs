use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Failure;
use crate::energy::{EllipticProblem, ProblemConfig, QuadratureSpec};
use crate::error::Result;
use crate::netcore::NetShape;
use crate::pgd::PgdConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub m: usize,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "L")]
    pub depth: usize,
}

/// Everything a `solve` run needs. `seed` drives the sample draw; `pgd.seed` the initialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub net: NetConfig,
    pub pgd: PgdConfig,
    #[serde(rename = "N_in")]
    pub n_interior: usize,
    #[serde(rename = "N_b")]
    pub n_boundary: usize,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A validated [`ExperimentConfig`].
#[derive(Clone, Debug)]
pub struct Experiment {
    pub problem: EllipticProblem,
    pub shape: NetShape,
    pub quadrature: QuadratureSpec,
}

impl ExperimentConfig {
    /// `u0 = Π cos(π x_i)`, `ω ≡ 1`, 64 sub-networks of width 4 and depth 3, 2048 samples of each kind.
    pub fn cosine_preset(d: usize, iterations: usize) -> Self {
        Self {
            problem: ProblemConfig::cosine(d),
            net: NetConfig { m: 64, width: 4, depth: 3 },
            pgd: PgdConfig::new(1.0, 10.0, 10.0, 1e-3, iterations, 7),
            n_interior: 2048,
            n_boundary: 2048,
            quadrature: None,
            output_dir: default_output_dir(),
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<Experiment> {
        let problem = self.problem.build()?;
        let shape = NetShape::new(self.net.m, self.net.width, self.net.depth, problem.dim())?;
        self.pgd.validate()?;
        if self.n_interior == 0 {
            return Err(crate::error::invalid("N_in must be at least 1"));
        }
        let quadrature = self.quadrature.unwrap_or_else(|| QuadratureSpec::default_for(problem.dim()));
        quadrature.validate(problem.dim())?;
        Ok(Experiment { problem, shape, quadrature })
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

/// SHA-256 of the canonical JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_string(value).expect("config serializes");
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

/// Reads and parses a JSON file; parse errors carry `path:line:column`.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

/// Loads and validates an experiment; every failure maps to the config exit code.
pub fn load_experiment(path: &Path) -> std::result::Result<(ExperimentConfig, Experiment), Failure> {
    let config: ExperimentConfig = load_json(path)?;
    let exp = config.validate().map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    Ok((config, exp))
}
