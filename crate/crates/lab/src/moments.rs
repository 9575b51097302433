//! Monte Carlo check of the exact light-cycle first moments on small
//! complete digraphs.

use rayon::prelude::*;
use serde::Serialize;

use mmwc_core::cycle_stats::{expected_light_cycles, MomentQuery, MAX_LEVEL};
use mmwc_core::graph::{for_each_simple_cycle, DEFAULT_ENUMERATION_GUARD};
use mmwc_core::{generate, InstanceSpec};

use crate::parallel::thread_pool;
use crate::phase::instance_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub exact: f64,
    pub mc_mean: f64,
    pub std_error: f64,
    /// `(mc_mean − exact) / std_error`; 0 when both agree with no spread.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub c: f64,
    pub seeds: usize,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// Count `c`-light cycles of every length on `seeds` instances and compare
/// the averages with the exact expectation.
pub fn run_moment_check(n: usize, c: f64, seeds: usize, master_seed: u64, parallelism: usize) -> anyhow::Result<MomentReport> {
    anyhow::ensure!(
        (2..=DEFAULT_ENUMERATION_GUARD).contains(&n),
        "moment check enumerates cycles and needs 2 <= n <= {DEFAULT_ENUMERATION_GUARD}, got {n}"
    );
    anyhow::ensure!((0.0..=MAX_LEVEL).contains(&c), "level c must lie in [0, {MAX_LEVEL}], got {c}");
    anyhow::ensure!(seeds >= 1, "need at least one seed");
    let pool = thread_pool(parallelism)?;
    let per_seed: Vec<anyhow::Result<Vec<u64>>> = pool.install(|| {
        (0..seeds)
            .into_par_iter()
            .map(|i| {
                let g = generate(&InstanceSpec { n, directed: true, seed: instance_seed(master_seed, n, i) })?;
                let mut counts = vec![0u64; n + 1];
                for_each_simple_cycle(&g, n, |vs, ws| {
                    let k = vs.len();
                    if n as f64 * ws.iter().sum::<f64>() / k as f64 <= c {
                        counts[k] += 1;
                    }
                })?;
                Ok(counts)
            })
            .collect()
    });
    let mut sum = vec![0u64; n + 1];
    let mut sum_sq = vec![0u64; n + 1];
    for counts in per_seed {
        for (k, v) in counts?.into_iter().enumerate() {
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let s = seeds as f64;
    let mut rows = Vec::new();
    for k in 2..=n {
        let exact = expected_light_cycles(&MomentQuery::new(n as u64, k as u64, c))?;
        let mean = sum[k] as f64 / s;
        let var = if seeds > 1 { (sum_sq[k] as f64 / s - mean * mean).max(0.0) * s / (s - 1.0) } else { 0.0 };
        let se = (var / s).sqrt();
        let diff = mean - exact;
        let z = if se > 0.0 {
            diff / se
        } else if diff.abs() <= 1e-12 * exact.max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        rows.push(MomentRow { k, exact, mc_mean: mean, std_error: se, z });
    }
    Ok(MomentReport { n, c, seeds, rows })
}
