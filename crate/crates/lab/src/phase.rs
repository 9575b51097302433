//! Phase-transition runs: one minimum mean-weight cycle per `(n, seed)`,
//! with weight and length statistics, cycle-shape diagnostics and per-`n`
//! summaries.

use std::collections::HashMap;
use std::f64::consts::E;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use mmwc_core::cycle_stats::{is_good, max_cyclic_excedance, untilted_bridge};
use mmwc_core::rng::derive_seed;
use mmwc_core::spectral::{c_critical, CriticalLevels};
use mmwc_core::stats::{linear_fit, quantile};
use mmwc_core::walk::{count_crossings, PathKind, WalkPath};
use mmwc_core::{generate, principal_lambda, InstanceSpec, Solver};

use crate::config::ExperimentConfig;
use crate::parallel::thread_pool;

/// Largest tolerated share of failed records.
pub const MAX_FAILURE_RATE: f64 = 0.01;
/// Slack added to `ln n` for the uniformity diagnostic.
pub const UNIFORMITY_SLACK: f64 = 10.0;

/// One row of the phase CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub seed: u64,
    /// `n` times the minimum cycle mean.
    #[serde(rename = "nW")]
    pub n_w: f64,
    /// Length of the minimum mean-weight cycle.
    #[serde(rename = "L")]
    pub length: usize,
    pub supercritical: bool,
    pub w_resid_cstar: f64,
    pub w_resid_ccirc: f64,
    #[serde(rename = "L_scaled")]
    pub l_scaled: f64,
    /// Smallest grid height with the cycle uniform at its own level.
    #[serde(rename = "uniform_A")]
    pub uniform_a: Option<f64>,
    /// Smallest grid slack with the cycle good.
    #[serde(rename = "good_Delta")]
    pub good_delta: Option<u32>,
}

/// Shape statistics of one optimal cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleDiagnostics {
    pub n: usize,
    pub seed: u64,
    /// Largest |excedance| of a proper cyclic subpath at the cycle's own level.
    pub max_excedance: f64,
    pub bridge_range: f64,
    /// Crossings of the middle half `[lo + r/4, lo + 3r/4]` of the untilted
    /// bridge, `r` its range.
    pub crossings_up: u64,
    pub crossings_down: u64,
    /// `(Δ, good)` for every admissible grid slack.
    pub goodness: Vec<(u32, bool)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordFailure {
    pub n: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        Some(Self { q10: quantile(values, 0.1)?, q50: quantile(values, 0.5)?, q90: quantile(values, 0.9)? })
    }

    pub fn spread(&self) -> f64 {
        self.q90 - self.q10
    }
}

/// Aggregates for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub records: usize,
    pub failures: usize,
    pub c_star: f64,
    pub c_circ: f64,
    pub supercritical: usize,
    pub supercritical_fraction: f64,
    /// Quantiles conditional on the supercritical event.
    pub w_resid_cstar: Option<Quantiles>,
    pub w_resid_ccirc: Option<Quantiles>,
    pub l_scaled: Option<Quantiles>,
    pub log_l_scaled: Option<Quantiles>,
    pub subcritical_median_length: Option<f64>,
    /// Supercritical cycles with `L < (ln n)² / 2`, as a fraction.
    pub short_cycle_fraction: Option<f64>,
    /// Cycles with `c̄ ≤ c∘ + 1/(ln n)³` and `L ≥ (ln n)²`.
    pub targeted: usize,
    /// Fraction of targeted cycles that are `(ln n + 10)`-uniform.
    pub targeted_uniform_fraction: Option<f64>,
    /// `(Δ, fraction of supercritical cycles that are Δ-good)`.
    pub good_fraction: Vec<(u32, f64)>,
    pub max_crossing_imbalance: u64,
}

/// Least-squares slope of `ln L` against `log₂ n` over subcritical records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthTrend {
    pub slope: f64,
    pub slope_se: f64,
    pub records: usize,
}

impl LengthTrend {
    /// Upward when the slope exceeds two standard errors.
    pub fn is_upward(&self) -> bool {
        self.slope > 2.0 * self.slope_se
    }
}

/// Trend of subcritical cycle lengths across sizes up to `max_n`.
pub fn subcritical_length_trend(records: &[ExperimentRecord], max_n: Option<usize>) -> Option<LengthTrend> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| !r.supercritical && max_n.is_none_or(|m| r.n <= m))
        .map(|r| ((r.n as f64).log2(), (r.length as f64).ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys)?;
    Some(LengthTrend { slope: fit.slope, slope_se: fit.slope_se, records: xs.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub master_seed: u64,
    pub solver: &'static str,
    pub sizes: Vec<SizeSummary>,
    pub subcritical_length_trend: Option<LengthTrend>,
    pub records: usize,
    pub failures: usize,
    pub failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub records: Vec<ExperimentRecord>,
    pub diagnostics: Vec<CycleDiagnostics>,
    pub failures: Vec<RecordFailure>,
    pub summary: PhaseSummary,
}

impl PhaseOutcome {
    pub fn failure_rate_ok(&self) -> bool {
        self.summary.failure_rate <= MAX_FAILURE_RATE
    }
}

/// Seed of instance `index` at size `n`.
pub fn instance_seed(master: u64, n: usize, index: usize) -> u64 {
    derive_seed(master, &[n as u64, index as u64])
}

/// Spectral quantities shared by all records of one size.
struct SizeContext {
    n: usize,
    levels: CriticalLevels,
    /// Principal eigenvalue for each admissible slack, keyed by slack.
    lambdas: HashMap<u32, f64>,
}

impl SizeContext {
    fn new(n: usize, deltas: &[u32]) -> anyhow::Result<Self> {
        let levels = c_critical(n as u64)?;
        let ln_n = (n as f64).ln();
        let mut lambdas = HashMap::new();
        for &d in deltas.iter().filter(|&&d| d as f64 <= ln_n / 2.0) {
            lambdas.insert(d, principal_lambda(ln_n.ceil() - d as f64)?.lambda);
        }
        Ok(Self { n, levels, lambdas })
    }
}

fn sorted<T: Copy + PartialOrd>(v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| a.partial_cmp(b).expect("grid values are comparable"));
    out
}

fn run_record(
    ctx: &SizeContext,
    seed: u64,
    cfg: &ExperimentConfig,
    a_grid: &[f64],
    delta_grid: &[u32],
) -> anyhow::Result<(ExperimentRecord, CycleDiagnostics)> {
    let n = ctx.n;
    let g = generate(&InstanceSpec { n, directed: cfg.directed, seed })?;
    let opt = Solver::from(cfg.solver).solve(&g)?;
    drop(g);
    let weights = &opt.cycle.weights;
    let n_w = opt.scaled_mean;
    let ln_n = (n as f64).ln();
    let cube = ln_n.powi(3);

    let max_excedance = max_cyclic_excedance(weights, n, n_w);
    let uniform_a = a_grid.iter().copied().find(|&a| max_excedance <= a);
    let mut goodness = Vec::new();
    for &d in delta_grid {
        if let Some(&lambda) = ctx.lambdas.get(&d) {
            goodness.push((d, is_good(weights, n, d, |_| Ok(lambda))?));
        }
    }
    let good_delta = goodness.iter().find(|g| g.1).map(|g| g.0);

    let bridge = untilted_bridge(weights, n, 0.0);
    let path = WalkPath::from_increments(0.0, bridge.increments, PathKind::Bridge);
    let (lo, r) = (path.min(), bridge.range);
    let (up, down) = if r > 0.0 { count_crossings(&path, lo + r / 4.0, lo + 3.0 * r / 4.0)? } else { (0, 0) };

    let record = ExperimentRecord {
        n,
        seed,
        n_w,
        length: opt.length,
        supercritical: n_w > 1.0 / E,
        w_resid_cstar: (n_w - ctx.levels.c_star) * cube,
        w_resid_ccirc: (n_w - ctx.levels.c_circ) * cube,
        l_scaled: opt.length as f64 / cube,
        uniform_a,
        good_delta,
    };
    let diag = CycleDiagnostics {
        n,
        seed,
        max_excedance,
        bridge_range: r,
        crossings_up: up,
        crossings_down: down,
        goodness,
    };
    Ok((record, diag))
}

/// Run every `(n, seed)` task of `cfg`. Failed tasks are logged and skipped;
/// check [`PhaseOutcome::failure_rate_ok`] afterwards.
pub fn run_phase(cfg: &ExperimentConfig) -> anyhow::Result<PhaseOutcome> {
    cfg.validate()?;
    let pool = thread_pool(cfg.parallelism)?;
    let a_grid = sorted(&cfg.a_grid);
    let delta_grid = sorted(&cfg.delta_grid);
    let contexts = cfg
        .n
        .iter()
        .map(|&n| SizeContext::new(n, &delta_grid))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let tasks: Vec<(usize, u64)> = (0..contexts.len())
        .flat_map(|c| (0..cfg.seeds_per_n).map(move |i| (c, i)))
        .map(|(c, i)| (c, instance_seed(cfg.master_seed, contexts[c].n, i)))
        .collect();
    let results: Vec<_> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, seed)| run_record(&contexts[c], seed, cfg, &a_grid, &delta_grid))
            .collect()
    });

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    for (&(c, seed), res) in tasks.iter().zip(results) {
        match res {
            Ok((r, d)) => {
                records.push(r);
                diagnostics.push(d);
            }
            Err(e) => {
                let n = contexts[c].n;
                log::warn!("record n={n} seed={seed} failed: {e:#}");
                failures.push(RecordFailure { n, seed, error: format!("{e:#}") });
            }
        }
    }
    let sizes = contexts
        .iter()
        .map(|ctx| summarize_size(ctx, &records, &diagnostics, &failures, &delta_grid))
        .collect();
    let total = tasks.len();
    let summary = PhaseSummary {
        master_seed: cfg.master_seed,
        solver: Solver::from(cfg.solver).name(),
        sizes,
        subcritical_length_trend: subcritical_length_trend(&records, None),
        records: records.len(),
        failures: failures.len(),
        failure_rate: failures.len() as f64 / total as f64,
    };
    Ok(PhaseOutcome { records, diagnostics, failures, summary })
}

fn fraction(hits: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

fn summarize_size(
    ctx: &SizeContext,
    records: &[ExperimentRecord],
    diagnostics: &[CycleDiagnostics],
    failures: &[RecordFailure],
    delta_grid: &[u32],
) -> SizeSummary {
    let n = ctx.n;
    let ln_n = (n as f64).ln();
    let rows: Vec<(&ExperimentRecord, &CycleDiagnostics)> =
        records.iter().zip(diagnostics).filter(|(r, _)| r.n == n).collect();
    let sup: Vec<_> = rows.iter().filter(|(r, _)| r.supercritical).collect();
    let pick = |f: fn(&ExperimentRecord) -> f64| sup.iter().map(|(r, _)| f(r)).collect::<Vec<f64>>();
    let sub_lengths: Vec<f64> = rows.iter().filter(|(r, _)| !r.supercritical).map(|(r, _)| r.length as f64).collect();

    let targeted: Vec<_> = rows
        .iter()
        .filter(|(r, _)| r.n_w <= ctx.levels.c_circ + 1.0 / ln_n.powi(3) && r.length as f64 >= ln_n * ln_n)
        .collect();
    let uniform_hits = targeted.iter().filter(|(_, d)| d.max_excedance <= ln_n + UNIFORMITY_SLACK).count();
    let good_fraction = delta_grid
        .iter()
        .filter(|d| ctx.lambdas.contains_key(d))
        .filter_map(|&d| {
            let hits = sup.iter().filter(|(_, diag)| diag.goodness.contains(&(d, true))).count();
            fraction(hits, sup.len()).map(|f| (d, f))
        })
        .collect();
    let short = sup.iter().filter(|(r, _)| (r.length as f64) < 0.5 * ln_n * ln_n).count();

    SizeSummary {
        n,
        records: rows.len(),
        failures: failures.iter().filter(|f| f.n == n).count(),
        c_star: ctx.levels.c_star,
        c_circ: ctx.levels.c_circ,
        supercritical: sup.len(),
        supercritical_fraction: fraction(sup.len(), rows.len()).unwrap_or(f64::NAN),
        w_resid_cstar: Quantiles::of(&pick(|r| r.w_resid_cstar)),
        w_resid_ccirc: Quantiles::of(&pick(|r| r.w_resid_ccirc)),
        l_scaled: Quantiles::of(&pick(|r| r.l_scaled)),
        log_l_scaled: Quantiles::of(&pick(|r| r.l_scaled.ln())),
        subcritical_median_length: quantile(&sub_lengths, 0.5),
        short_cycle_fraction: fraction(short, sup.len()),
        targeted: targeted.len(),
        targeted_uniform_fraction: fraction(uniform_hits, targeted.len()),
        good_fraction,
        max_crossing_imbalance: rows.iter().map(|(_, d)| d.crossings_up.abs_diff(d.crossings_down)).max().unwrap_or(0),
    }
}

/// Write the phase CSV (columns in the order of [`ExperimentRecord`]).
pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "n",
            "seed",
            "nW",
            "L",
            "supercritical",
            "w_resid_cstar",
            "w_resid_ccirc",
            "L_scaled",
            "uniform_A",
            "good_Delta",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the CSV and the summary JSON named by `cfg`.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &PhaseOutcome) -> anyhow::Result<()> {
    let csv_file = std::io::BufWriter::new(std::fs::File::create(&cfg.out_csv)?);
    write_records(csv_file, &outcome.records)?;
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    std::fs::write(cfg.summary_path(), json + "\n")?;
    Ok(())
}

/// Diagnostics of the supercritical optima of a phase run, with the per-`n`
/// aggregates.
pub fn run_diagnostics(cfg: &ExperimentConfig) -> anyhow::Result<(Vec<CycleDiagnostics>, Vec<SizeSummary>)> {
    let outcome = run_phase(cfg)?;
    let diags = outcome
        .records
        .iter()
        .zip(outcome.diagnostics)
        .filter(|(r, _)| r.supercritical)
        .map(|(_, d)| d)
        .collect();
    Ok((diags, outcome.summary.sizes))
}
