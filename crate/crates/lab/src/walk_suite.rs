//! Range-probability decay and local-time envelope runs for range-restricted
//! bridges, compared against the spectral eigenvalue.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mmwc_core::cycle_stats::delta_profile;
use mmwc_core::principal_lambda;
use mmwc_core::rng::derive_seed;
use mmwc_core::stats::linear_fit;
use mmwc_core::walk::{BridgeLocalTime, BridgeRange, LocalTimeProfile, McEstimate};

use crate::config::{read_json, ConfigError};
use crate::parallel::{run_chunks_parallel, thread_pool};
use crate::table::EstimateRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSuiteConfig {
    pub master_seed: u64,
    pub parallelism: usize,
    pub out_csv: Option<PathBuf>,
    /// Interval height for the range-probability decay fit.
    #[serde(rename = "range_A")]
    pub range_a: f64,
    pub range_ks: Vec<usize>,
    pub range_samples: u64,
    /// Allowed relative error of the fitted slope against `ln λ_A`.
    pub slope_tolerance: f64,
    #[serde(rename = "local_time_A")]
    pub local_time_a: f64,
    pub local_time_ks: Vec<usize>,
    pub local_time_samples: u64,
    /// Allowed relative change of the envelope constant across `k`.
    pub envelope_tolerance: f64,
    /// Largest allowed boundary-bin to central-bin local-time ratio.
    pub boundary_ratio_max: f64,
}

impl Default for WalkSuiteConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            parallelism: 1,
            out_csv: None,
            range_a: 8.0,
            range_ks: vec![64, 128, 192, 256],
            range_samples: 1_000_000,
            slope_tolerance: 0.05,
            local_time_a: 8.0,
            local_time_ks: vec![128, 256],
            local_time_samples: 6_000_000,
            envelope_tolerance: 0.5,
            boundary_ratio_max: 0.2,
        }
    }
}

impl WalkSuiteConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let cfg: Self = read_json(path)?;
        if cfg.parallelism == 0 {
            return Err(ConfigError::Invalid("parallelism must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Serializable copy of an [`McEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub acceptance_rate: Option<f64>,
}

impl From<McEstimate> for Estimate {
    fn from(e: McEstimate) -> Self {
        Self { value: e.value, std_error: e.std_error, samples: e.samples, acceptance_rate: e.acceptance_rate }
    }
}

/// Fit of `ln R̂_k − (3/2) ln k` against `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeDecay {
    pub a: f64,
    pub ks: Vec<usize>,
    pub estimates: Vec<Estimate>,
    pub slope: f64,
    pub slope_se: f64,
    pub log_lambda: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeCase {
    pub k: usize,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub visits: Vec<f64>,
    /// Per-bin `ℓ̂(S) / ((1 + |S|) max_S δ_A²)`.
    pub envelope: Vec<f64>,
    pub constant: f64,
    /// Largest edge-bin visits over mean central-bin visits.
    pub boundary_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTimeEnvelope {
    pub a: f64,
    pub cases: Vec<LocalTimeCase>,
    /// Largest constant over smallest, minus one.
    pub constant_drift: f64,
    pub stable: bool,
    pub boundary_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkSuiteReport {
    /// `Err` holds the reason a case could not run (for example the guard).
    pub range_decay: Result<RangeDecay, String>,
    pub local_time: Result<LocalTimeEnvelope, String>,
    #[serde(skip)]
    pub rows: Vec<(String, EstimateRow)>,
}

/// `max_{x ∈ [lo, hi]} δ_A(x)`.
fn max_profile(a: f64, lo: f64, hi: f64) -> f64 {
    let mid = a / 2.0;
    if lo <= mid && mid <= hi {
        delta_profile(a, mid)
    } else {
        delta_profile(a, lo).max(delta_profile(a, hi))
    }
}

/// Envelope statistics of one local-time profile.
pub fn envelope_case(k: usize, a: f64, profile: &LocalTimeProfile) -> LocalTimeCase {
    let visits: Vec<f64> = profile.visits.iter().map(|v| v.value).collect();
    let edges = &profile.edges;
    let envelope: Vec<f64> = visits
        .iter()
        .enumerate()
        .map(|(b, &l)| {
            let (lo, hi) = (edges[b], edges[b + 1]);
            l / ((1.0 + (hi - lo)) * max_profile(a, lo, hi).powi(2))
        })
        .collect();
    let central: Vec<f64> = (0..visits.len())
        .filter(|&b| edges[b] <= a / 2.0 && a / 2.0 <= edges[b + 1])
        .map(|b| visits[b])
        .collect();
    let central_mean = central.iter().sum::<f64>() / central.len() as f64;
    let boundary = visits[0].max(visits[visits.len() - 1]);
    LocalTimeCase {
        k,
        accepted: profile.visits.first().map_or(0, |v| v.samples),
        acceptance_rate: profile.acceptance.value,
        envelope: envelope.clone(),
        constant: envelope.iter().copied().fold(0.0, f64::max),
        boundary_ratio: boundary / central_mean,
        visits,
    }
}

pub fn run_walk_suite(cfg: &WalkSuiteConfig) -> anyhow::Result<WalkSuiteReport> {
    let pool = thread_pool(cfg.parallelism)?;
    let mut rows = Vec::new();
    let fmt = |v: f64| v.to_string();

    let range_decay = (|| -> anyhow::Result<RangeDecay> {
        anyhow::ensure!(cfg.range_ks.len() >= 2, "range fit needs at least two k values");
        let log_lambda = principal_lambda(cfg.range_a)?.lambda.ln();
        let mut estimates = Vec::new();
        let mut ys = Vec::new();
        for &k in &cfg.range_ks {
            let est = BridgeRange::new(k, cfg.range_a)?;
            let seed = derive_seed(cfg.master_seed, &[1, k as u64]);
            let e = run_chunks_parallel(&est, cfg.range_samples, seed, &pool);
            anyhow::ensure!(e.value > 0.0, "no bridge of length {k} had range <= {}", cfg.range_a);
            ys.push(e.value.ln() - 1.5 * (k as f64).ln());
            rows.push((
                "range_prob".to_string(),
                EstimateRow::new([fmt(k as f64), fmt(cfg.range_a), String::new(), String::new()], e),
            ));
            estimates.push(e.into());
        }
        let xs: Vec<f64> = cfg.range_ks.iter().map(|&k| k as f64).collect();
        let fit = linear_fit(&xs, &ys).ok_or_else(|| anyhow::anyhow!("degenerate k grid"))?;
        let relative_error = (fit.slope / log_lambda - 1.0).abs();
        Ok(RangeDecay {
            a: cfg.range_a,
            ks: cfg.range_ks.clone(),
            estimates,
            slope: fit.slope,
            slope_se: fit.slope_se,
            log_lambda,
            relative_error,
            pass: relative_error <= cfg.slope_tolerance,
        })
    })()
    .map_err(|e| format!("{e:#}"));

    let local_time = (|| -> anyhow::Result<LocalTimeEnvelope> {
        anyhow::ensure!(!cfg.local_time_ks.is_empty(), "local-time run needs at least one k");
        let a = cfg.local_time_a;
        let bins = (a.ceil() as usize).max(1);
        let mut cases = Vec::new();
        for &k in &cfg.local_time_ks {
            let est = BridgeLocalTime::new(k, a, bins)?;
            let seed = derive_seed(cfg.master_seed, &[2, k as u64]);
            let profile = run_chunks_parallel(&est, cfg.local_time_samples, seed, &pool);
            anyhow::ensure!(profile.acceptance.value > 0.0, "no bridge of length {k} had range <= {a}");
            for (b, v) in profile.visits.iter().enumerate() {
                rows.push((
                    "local_time".to_string(),
                    EstimateRow::new([fmt(k as f64), fmt(a), fmt(profile.edges[b]), fmt(profile.edges[b + 1])], *v),
                ));
            }
            cases.push(envelope_case(k, a, &profile));
        }
        let hi = cases.iter().map(|c| c.constant).fold(f64::NEG_INFINITY, f64::max);
        let lo = cases.iter().map(|c| c.constant).fold(f64::INFINITY, f64::min);
        let constant_drift = hi / lo - 1.0;
        Ok(LocalTimeEnvelope {
            a,
            stable: constant_drift <= cfg.envelope_tolerance,
            boundary_ok: cases.iter().all(|c| c.boundary_ratio <= cfg.boundary_ratio_max),
            constant_drift,
            cases,
        })
    })()
    .map_err(|e| format!("{e:#}"));

    Ok(WalkSuiteReport { range_decay, local_time, rows })
}

/// Parameter columns of the suite CSV, before the estimate columns.
pub const SUITE_COLUMNS: [&str; 5] = ["case", "k", "A", "bin_lo", "bin_hi"];

pub fn suite_rows(report: &WalkSuiteReport) -> Vec<EstimateRow> {
    report
        .rows
        .iter()
        .map(|(case, row)| {
            let mut params = vec![case.clone()];
            params.extend(row.params.iter().cloned());
            EstimateRow { params, estimate: row.estimate }
        })
        .collect()
}
