//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mmwc_core::Solver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Karp,
    Howard,
}

impl From<SolverChoice> for Solver {
    fn from(s: SolverChoice) -> Self {
        match s {
            SolverChoice::Karp => Solver::Karp,
            SolverChoice::Howard => Solver::Howard,
        }
    }
}

fn default_solver() -> SolverChoice {
    SolverChoice::Howard
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Phase-transition run over a grid of `n` with independent seeds per `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub seeds_per_n: usize,
    #[serde(default = "default_solver")]
    pub solver: SolverChoice,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub parallelism: usize,
    pub out_csv: PathBuf,
    /// Candidate heights for the uniformity column.
    #[serde(rename = "A_grid", default)]
    pub a_grid: Vec<f64>,
    /// Candidate slacks for the goodness column.
    #[serde(rename = "Delta_grid", default)]
    pub delta_grid: Vec<u32>,
    /// Summary path; defaults to `out_csv` with extension `summary.json`.
    #[serde(default)]
    pub summary_json: Option<PathBuf>,
    /// Directed (default) or undirected mean-field instances.
    #[serde(default = "yes")]
    pub directed: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n.is_empty() {
            return bad("n must list at least one size".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 8) {
            return bad(format!("every n must be at least 8, got {n}"));
        }
        if self.seeds_per_n == 0 {
            return bad("seeds_per_n must be at least 1".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if let Some(a) = self.a_grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return bad(format!("A_grid entries must be positive, got {a}"));
        }
        if self.delta_grid.contains(&0) {
            return bad("Delta_grid entries must be at least 1".into());
        }
        Ok(())
    }

    pub fn summary_path(&self) -> PathBuf {
        self.summary_json.clone().unwrap_or_else(|| self.out_csv.with_extension("summary.json"))
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })
}
