//! End-to-end acceptance checks, one PASS/FAIL line per criterion. Exits
//! nonzero when any criterion fails.

use std::f64::consts::{E, PI};
use std::time::Instant;

use num_complex::Complex64;

use mmwc_core::cycle_stats::extract_uniform_subpaths;
use mmwc_core::graph::enumerate_simple_cycles;
use mmwc_core::rng::Stream;
use mmwc_core::spectral::{eigen_residual, g_closed, g_series, height_for_delta, lambert_w};
use mmwc_core::{generate, howard_mmc, karp_mmc, principal_lambda, InstanceSpec};
use mmwc_lab::phase::subcritical_length_trend;
use mmwc_lab::{run_moment_check, run_phase, run_walk_suite, ExperimentConfig, WalkSuiteConfig};

const SOLVER_INSTANCES: u64 = 500;
const SOLVER_TOL: f64 = 1e-12;
const SOLVER_SECONDS: f64 = 30.0;
const SMALL_H_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;
const RESIDUAL_QUAD_POINTS: usize = 64;
const ASYMPTOTIC_CONSTANT: f64 = 3.0;
const HEIGHT_CONSTANT: f64 = 2.0;
const ROUND_TRIP_TOL: f64 = 1e-9;
const SERIES_TOL: f64 = 1e-6;
const SERIES_ORDER: usize = 50;
const SLOPE_TOL: f64 = 0.05;
const ENVELOPE_DRIFT: f64 = 0.5;
const BOUNDARY_RATIO: f64 = 0.2;
const MOMENT_SEEDS: usize = 10_000;
const MOMENT_Z: f64 = 3.0;
const PHASE_SEEDS: usize = 200;
const PHASE_SIZES: [usize; 5] = [256, 512, 1024, 2048, 4096];
const SUPERCRITICAL_BAND: (f64, f64) = (0.05, 0.95);
const LENGTH_BAND_C: f64 = 20.0;
const SPREAD_GROWTH: f64 = 0.5;
const SUBCRITICAL_TREND_MAX_N: usize = 2048;
const LAMBERT_SAMPLES: usize = 100;
const LAMBERT_TOL: f64 = 1e-12;
const EXTRACTION_PATHS: usize = 10_000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |p| p.get())
}

fn solver_exactness() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..SOLVER_INSTANCES {
        let n = 2 + (i % 8) as usize;
        let g = generate(&InstanceSpec { n, directed: true, seed: 1000 + i }).unwrap();
        let brute = enumerate_simple_cycles(&g, 9).unwrap().iter().map(|c| c.mean()).fold(f64::INFINITY, f64::min);
        for mu in [karp_mmc(&g).unwrap().mu_star, howard_mmc(&g).unwrap().mu_star] {
            worst = worst.max((mu - brute).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= SOLVER_TOL && secs < SOLVER_SECONDS,
        format!("{SOLVER_INSTANCES} instances, n 2..=9, max error {worst:.1e}, {secs:.1} s"),
    )
}

fn small_height_law() -> Verdict {
    let worst = [0.1, 0.5, 0.9].iter().map(|&h| (principal_lambda(h).unwrap().lambda - h / E).abs()).fold(0.0, f64::max);
    verdict(worst <= SMALL_H_TOL, format!("max |lambda - H/e| {worst:.1e}"))
}

fn eigen_residuals() -> Verdict {
    let rs: Vec<f64> = [2.0, 5.0, 10.0, 20.0]
        .iter()
        .map(|&h| eigen_residual(principal_lambda(h).unwrap().lambda, h, RESIDUAL_QUAD_POINTS).unwrap())
        .collect();
    let worst = rs.iter().copied().fold(0.0, f64::max);
    let shown: Vec<String> = rs.iter().map(|r| format!("{r:.1e}")).collect();
    verdict(worst <= RESIDUAL_TOL, format!("residuals for H=2,5,10,20 [{}]", shown.join(", ")))
}

fn eigenvalue_asymptotics() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [10.0, 20.0, 30.0, 40.0] {
        let dev = (principal_lambda(h).unwrap().delta * 2.0 * (h + 4.0 / 3.0).powi(2) / (PI * PI) - 1.0).abs();
        pass &= dev <= ASYMPTOTIC_CONSTANT / h;
        parts.push(format!("H={h}: {dev:.4} <= {:.4}", ASYMPTOTIC_CONSTANT / h));
    }
    verdict(pass, parts.join(", "))
}

fn height_formula() -> Verdict {
    let mut pass = true;
    let (mut worst_gap, mut worst_trip) = (0.0f64, 0.0f64);
    for delta in [0.002, 0.005, 0.01, 0.02] {
        let h = height_for_delta(delta).unwrap();
        let gap = (h - (PI / (2.0 * delta).sqrt() - 4.0 / 3.0)).abs();
        let trip = (principal_lambda(h).unwrap().delta - delta).abs();
        pass &= gap <= HEIGHT_CONSTANT * delta.sqrt() && trip <= ROUND_TRIP_TOL;
        worst_gap = worst_gap.max(gap / delta.sqrt());
        worst_trip = worst_trip.max(trip);
    }
    verdict(pass, format!("max gap/sqrt(delta) {worst_gap:.3}, max round-trip error {worst_trip:.1e}"))
}

fn closed_vs_series() -> Verdict {
    let worst = (0..181)
        .map(|i| {
            let x = 2.0 + 0.1 * i as f64;
            (g_closed(0.95, x).unwrap() - g_series(0.95, x, SERIES_ORDER).unwrap().value).abs()
        })
        .fold(0.0, f64::max);
    verdict(worst <= SERIES_TOL, format!("181 points, max difference {worst:.1e}"))
}

fn walk_suite() -> (Verdict, Verdict) {
    let cfg = WalkSuiteConfig {
        parallelism: parallelism(),
        slope_tolerance: SLOPE_TOL,
        envelope_tolerance: ENVELOPE_DRIFT,
        boundary_ratio_max: BOUNDARY_RATIO,
        ..WalkSuiteConfig::default()
    };
    let report = run_walk_suite(&cfg).unwrap();
    let range = match &report.range_decay {
        Ok(d) => verdict(
            d.relative_error <= SLOPE_TOL,
            format!(
                "A={} slope {:.5} vs ln lambda {:.5}, relative error {:.4}",
                d.a, d.slope, d.log_lambda, d.relative_error
            ),
        ),
        Err(e) => verdict(false, e.clone()),
    };
    let local = match &report.local_time {
        Ok(env) => {
            let constants: Vec<String> = env.cases.iter().map(|c| format!("k={}: {:.3}", c.k, c.constant)).collect();
            let ratios: Vec<String> =
                env.cases.iter().map(|c| format!("k={}: {:.3}", c.k, c.boundary_ratio)).collect();
            verdict(
                env.constant_drift <= ENVELOPE_DRIFT && env.boundary_ok,
                format!(
                    "(a) envelope constants [{}], drift {:.3} (limit {ENVELOPE_DRIFT}) {}; (b) boundary ratios [{}] (limit {BOUNDARY_RATIO}) {}",
                    constants.join(", "),
                    env.constant_drift,
                    if env.constant_drift <= ENVELOPE_DRIFT { "ok" } else { "FAIL" },
                    ratios.join(", "),
                    if env.boundary_ok { "ok" } else { "FAIL" },
                ),
            )
        }
        Err(e) => verdict(false, e.clone()),
    };
    (range, local)
}

fn moment_agreement() -> Verdict {
    let r = run_moment_check(7, 0.5, MOMENT_SEEDS, 1, parallelism()).unwrap();
    let zs: Vec<String> = r.rows.iter().map(|row| format!("{:.2}", row.z)).collect();
    verdict(r.max_abs_z() <= MOMENT_Z, format!("n=7 c=0.5 {MOMENT_SEEDS} seeds, z by k=2..7 [{}]", zs.join(", ")))
}

fn phase_suite() -> Verdict {
    let dir = std::env::temp_dir();
    let cfg = ExperimentConfig {
        n: PHASE_SIZES.to_vec(),
        seeds_per_n: PHASE_SEEDS,
        solver: mmwc_lab::SolverChoice::Howard,
        master_seed: 2024,
        parallelism: parallelism(),
        out_csv: dir.join("mmwc-acceptance-phase.csv"),
        a_grid: vec![],
        delta_grid: vec![],
        summary_json: None,
        directed: true,
    };
    let out = run_phase(&cfg).unwrap();
    let sizes = &out.summary.sizes;

    let fractions: Vec<f64> = sizes.iter().map(|s| s.supercritical_fraction).collect();
    let a_ok = fractions.iter().all(|&f| f > SUPERCRITICAL_BAND.0 && f < SUPERCRITICAL_BAND.1);

    let medians: Vec<f64> = sizes.iter().map(|s| s.l_scaled.map_or(f64::NAN, |q| q.q50)).collect();
    let b_ok = medians.iter().all(|&m| m >= 1.0 / LENGTH_BAND_C && m <= LENGTH_BAND_C);
    let needed_c = medians.iter().map(|&m| m.max(1.0 / m)).fold(0.0, f64::max);

    let growth = |spreads: Vec<f64>| spreads.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::NEG_INFINITY, f64::max);
    let w_growth = growth(sizes.iter().map(|s| s.w_resid_cstar.map_or(f64::NAN, |q| q.spread())).collect());
    let l_growth = growth(sizes.iter().map(|s| s.log_l_scaled.map_or(f64::NAN, |q| q.spread())).collect());
    let c_ok = w_growth <= SPREAD_GROWTH && l_growth <= SPREAD_GROWTH;

    let trend = subcritical_length_trend(&out.records, Some(SUBCRITICAL_TREND_MAX_N)).unwrap();
    let d_ok = !trend.is_upward();
    let sub_medians: Vec<String> =
        sizes.iter().map(|s| s.subcritical_median_length.map_or("-".into(), |m| m.to_string())).collect();

    let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
    verdict(
        a_ok && b_ok && c_ok && d_ok && out.failure_rate_ok(),
        format!(
            "(a) supercritical fractions {fractions:.3?} {}; (b) median L_scaled {medians:.4?}, band needs C={needed_c:.1} (limit {LENGTH_BAND_C}) {}; \
             (c) max spread growth per doubling w_resid {w_growth:.3}, log L_scaled {l_growth:.3} (limit {SPREAD_GROWTH}) {}; \
             (d) subcritical ln L slope per doubling {:.4} +- {:.4} over n <= {SUBCRITICAL_TREND_MAX_N}, medians [{}] {}; \
             {} records, {} failures",
            flag(a_ok),
            flag(b_ok),
            flag(c_ok),
            trend.slope,
            trend.slope_se,
            sub_medians.join(", "),
            flag(d_ok),
            out.records.len(),
            out.failures.len(),
        ),
    )
}

/// Branch of Lambert W owning `w`, from the boundary curves `ξ = −η cot η`.
fn lambert_branch(w: Complex64) -> i32 {
    let (xi, eta) = (w.re, w.im);
    if eta == 0.0 {
        return if xi >= -1.0 { 0 } else { -1 };
    }
    if eta < 0.0 {
        return -lambert_branch(w.conj());
    }
    let m = (eta / (2.0 * PI)).floor();
    let curved = eta - 2.0 * PI * m < PI;
    let m = m as i32;
    if curved && xi >= -eta / eta.tan() {
        m
    } else {
        m + 1
    }
}

fn lambert_branches() -> Verdict {
    let mut s = Stream::new(2024, 0);
    let (mut worst, mut misplaced) = (0.0f64, 0usize);
    for k in -5..=5 {
        for _ in 0..LAMBERT_SAMPLES {
            let z = Complex64::from_polar(10f64.powf(-3.0 + 6.0 * s.uniform()), PI * (2.0 * s.uniform() - 1.0));
            let w = lambert_w(k, z).unwrap();
            worst = worst.max((w * w.exp() - z).norm() / z.norm());
            misplaced += usize::from(lambert_branch(w) != k);
        }
    }
    let mut range_violations = 0;
    for i in 1..=200 {
        let z = Complex64::new(-1.0 / (E * (i as f64 / 200.0)), 0.0);
        for k in 0..=5 {
            let im = lambert_w(k, z).unwrap().im;
            let lo = 2.0 * k as f64 * PI;
            range_violations += usize::from(!(im >= lo - 1e-12 && im < lo + PI));
        }
    }
    verdict(
        worst <= LAMBERT_TOL && misplaced == 0 && range_violations == 0,
        format!(
            "1100 samples, max relative residual {worst:.1e}, {misplaced} off-branch, {range_violations} Im-range violations"
        ),
    )
}

fn subpath_extraction() -> Verdict {
    let mut s = Stream::new(77, 0);
    let (n, c) = (10usize, 1.0);
    let mut failures = Vec::new();
    let mut checked = 0;
    while checked < EXTRACTION_PATHS {
        let a = 2.0 + 6.0 * s.uniform();
        let a_prime = 2.0 + (a - 2.0) * s.uniform();
        let len = 20 + s.below(280) as usize;
        let weights: Vec<f64> =
            (0..len).map(|_| c / n as f64 * 0.5 * s.exp1() * if s.uniform() < 0.1 { 4.0 } else { 1.0 }).collect();
        let mut w = vec![0.0];
        for &x in &weights {
            w.push(w[w.len() - 1] + n as f64 * x / c - 1.0);
        }
        if w[w.len() - 1] >= -a {
            continue;
        }
        checked += 1;
        let expected = (a - a_prime).floor() as usize + 1;
        match extract_uniform_subpaths(&weights, n, c, a, a_prime) {
            Ok(spans) if spans.len() == expected => {
                let mut starts: Vec<usize> = spans.iter().map(|p| p.0).collect();
                starts.sort_unstable();
                starts.dedup();
                if starts.len() != spans.len() {
                    failures.push("repeated subpath".to_string());
                }
                for (i, &(eta, tau)) in spans.iter().enumerate() {
                    if let Err(e) = check_subpath(&w, i, a_prime, eta, tau) {
                        failures.push(e);
                    }
                }
            }
            Ok(spans) => failures.push(format!("{} subpaths, expected {expected}", spans.len())),
            Err(e) => failures.push(e.to_string()),
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{EXTRACTION_PATHS} paths, {} failures{}",
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(", first: {f}"))
        ),
    )
}

/// End points in their bands and every sub-window within `A′` in excedance.
fn check_subpath(w: &[f64], i: usize, a_prime: f64, eta: usize, tau: usize) -> Result<(), String> {
    let (x, y) = (-(i as f64), -(i as f64 + a_prime));
    if !(eta < tau && tau < w.len()) {
        return Err(format!("bad indices {eta}..{tau}"));
    }
    if !(w[eta] > x - 1.0 && w[eta] <= x && w[tau] > y && w[tau] <= y + 1.0) {
        return Err(format!("subpath {i} end points {} {} outside their bands", w[eta], w[tau]));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &w[eta..=tau] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo > a_prime + 1e-9 {
        return Err(format!("subpath {i} has a window of excedance {}", hi - lo));
    }
    Ok(())
}

fn report(id: usize, name: &str, v: &Verdict, secs: f64) {
    println!("{id:>2} {} {name}: {} [{secs:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
}

fn main() {
    let single: [(usize, &str, fn() -> Verdict); 10] = [
        (1, "solver exactness", solver_exactness),
        (2, "eigenvalue at small H", small_height_law),
        (3, "eigen-residual", eigen_residuals),
        (4, "eigenvalue asymptotics", eigenvalue_asymptotics),
        (5, "height formula", height_formula),
        (6, "closed form vs pole series", closed_vs_series),
        (9, "first-moment agreement", moment_agreement),
        (10, "phase-transition properties", phase_suite),
        (11, "Lambert W branches", lambert_branches),
        (12, "subpath extraction", subpath_extraction),
    ];
    let mut passed = Vec::new();
    for &(id, name, f) in &single {
        if id == 9 {
            // Criteria 7 and 8 share one walk-suite run.
            let t = Instant::now();
            let (range, local) = walk_suite();
            let secs = t.elapsed().as_secs_f64();
            report(7, "bridge range decay", &range, secs);
            report(8, "local-time envelope", &local, secs);
            passed.extend([range.pass, local.pass]);
        }
        let t = Instant::now();
        let v = f();
        report(id, name, &v, t.elapsed().as_secs_f64());
        passed.push(v.pass);
    }
    let ok = passed.iter().filter(|&&p| p).count();
    println!("{ok} of {} criteria passed", passed.len());
    if ok < passed.len() {
        std::process::exit(1);
    }
}
