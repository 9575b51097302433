use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mmwc_core::cycle_stats::{
    expected_light_band, expected_light_cycles, expected_light_paths, expected_uniform_light_cycles,
    light_band_envelope, MomentQuery,
};
use mmwc_core::spectral::{
    eigenvalue_curve, g_closed_with_error, g_eval, g_series, height_for_delta, tau, SpectralSolution,
    CANCELLATION_ALARM,
};
use mmwc_core::walk::{
    default_bins, estimate_range_prob, BridgeLocalTime, BridgeRange, KernelHistogram, ResampledWalk, WalkKernel,
    WalkSurvival, DEFAULT_POPULATION,
};
use mmwc_core::{generate, principal_lambda, InstanceSpec, Solver};
use mmwc_lab::table::{output, write_estimates, EstimateRow};
use mmwc_lab::walk_suite::{suite_rows, SUITE_COLUMNS};
use mmwc_lab::{
    read_edge_list, run_chunks_parallel, run_moment_check, run_phase, run_walk_suite, thread_pool, write_edge_list,
    ExperimentConfig, SolverChoice, WalkSuiteConfig,
};

/// Minimum mean-weight cycles in random complete digraphs, with the random
/// walk and spectral tools around them.
#[derive(Parser)]
#[command(name = "mmwc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an edge-list file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "howard")]
        solver: SolverChoice,
        /// Print JSON instead of a one-line summary.
        #[arg(long)]
        json: bool,
    },
    /// Write a mean-field instance as an edge list.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        undirected: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact first moments of light-cycle counts (JSON).
    Moments(MomentsArgs),
    /// Monte Carlo estimates for exp-minus-one walks and bridges.
    #[command(subcommand)]
    Walk(WalkCommand),
    /// Eigenvalues, eigenfunctions and characteristic roots.
    #[command(subcommand)]
    Spectral(SpectralCommand),
    /// Batch experiments driven by a JSON config.
    #[command(subcommand)]
    Sim(SimCommand),
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Interval height for the uniform count.
    #[arg(long = "A")]
    a: Option<f64>,
    /// Range probability; estimated by simulation when omitted and `--A` is given.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Bridges used to estimate the range probability.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Output CSV path (stdout when omitted or `-`).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
}

#[derive(Args)]
struct ResampleArgs {
    /// Use resampled populations; `--samples` then counts walkers in total.
    #[arg(long)]
    resample: bool,
    #[arg(long, default_value_t = DEFAULT_POPULATION)]
    population: usize,
}

#[derive(Subcommand)]
enum WalkCommand {
    /// Probability that a k-bridge has range at most A.
    RangeProb {
        #[arg(long)]
        k: usize,
        #[arg(long = "A")]
        a: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Probability that a walk from x stays in [0, A] for k steps.
    Survival {
        #[arg(long)]
        x: f64,
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        resample: ResampleArgs,
    },
    /// End-point density of walks from x that stay in [0, A].
    Kernel {
        #[arg(long)]
        x: f64,
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        resample: ResampleArgs,
    },
    /// Mean visits per bin of recentered bridges with range at most A.
    Localtime {
        #[arg(long)]
        k: usize,
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Subcommand)]
enum SpectralCommand {
    /// Principal eigenvalue for interval height H.
    Lambda {
        #[arg(long = "H")]
        h: f64,
    },
    /// Interval height whose principal eigenvalue is exp(-delta).
    Height {
        #[arg(long)]
        delta: f64,
    },
    /// The eigenfunction g at x.
    G {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        x: f64,
        #[arg(long = "K", default_value_t = 50)]
        order: usize,
    },
    /// Characteristic roots s_k for |k| <= K.
    Roots {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "K", default_value_t = 50)]
        order: usize,
    },
    /// Eigenvalue curve as CSV: H, lambda_principal, lambda_2, ...
    Curve {
        #[arg(long = "Hmin")]
        h_min: f64,
        #[arg(long = "Hmax")]
        h_max: f64,
        #[arg(long)]
        step: f64,
        /// Eigenvalues at or below this are omitted.
        #[arg(long, default_value_t = 1e-3)]
        lambda_min: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Phase-transition statistics over a grid of n.
    Phase {
        #[arg(long)]
        config: PathBuf,
    },
    /// Range-probability decay and local-time envelope checks.
    WalkSuite {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact light-cycle counts against simulation on small instances.
    MomentCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Solve { input, solver, json } => solve(input, solver.into(), json),
        Command::Gen { n, seed, undirected, out } => {
            let g = generate(&InstanceSpec { n, directed: !undirected, seed })?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_edge_list(&g, BufWriter::new(file))?;
            Ok(())
        }
        Command::Moments(args) => moments(args),
        Command::Walk(cmd) => walk(cmd),
        Command::Spectral(cmd) => spectral(cmd),
        Command::Sim(cmd) => sim(cmd),
    }
}

fn solve(input: PathBuf, solver: Solver, json: bool) -> Result<()> {
    let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let g = read_edge_list(BufReader::new(file)).with_context(|| format!("reading {}", input.display()))?;
    let r = solver.solve(&g)?;
    if json {
        print_json(&json!({ "mu_star": r.mu_star, "length": r.length, "cycle": r.cycle.vertices }))
    } else {
        println!("mu_star {} length {} cycle {:?}", r.mu_star, r.length, r.cycle.vertices);
        Ok(())
    }
}

fn moments(args: MomentsArgs) -> Result<()> {
    let q = MomentQuery { n: args.n, k: args.k, c: args.c, delta: args.delta, a: args.a };
    let mut out = json!({
        "n": q.n,
        "k": q.k,
        "c": q.c,
        "expected_light_cycles": expected_light_cycles(&q)?,
    });
    if q.k < q.n {
        out["expected_light_paths"] = json!(expected_light_paths(&q)?);
    }
    if let Some(delta) = q.delta {
        out["delta"] = json!(delta);
        out["expected_light_band"] = json!(expected_light_band(&q)?);
        out["band_envelope"] = json!(light_band_envelope(&q)?);
    }
    if let Some(a) = q.a {
        let (r, se) = match args.r {
            Some(r) => (r, None),
            None => {
                let e = estimate_range_prob(q.k as usize, a, args.samples, args.seed)?;
                (e.value, Some(e.std_error))
            }
        };
        out["A"] = json!(a);
        out["R"] = json!(r);
        if let Some(se) = se {
            out["R_std_error"] = json!(se);
        }
        out["expected_uniform_light_cycles"] = json!(expected_uniform_light_cycles(&q, r)?);
    }
    print_json(&out)
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn kernel_rows(x: f64, a: f64, k: usize, h: &KernelHistogram) -> Vec<EstimateRow> {
    let mut rows = vec![EstimateRow::new(
        ["survival".into(), fmt(x), fmt(a), k.to_string(), String::new(), String::new()],
        h.survival,
    )];
    for (name, series) in [("conditional", &h.conditional), ("unconditional", &h.unconditional)] {
        for (b, e) in series.iter().enumerate() {
            rows.push(EstimateRow::new(
                [name.into(), fmt(x), fmt(a), k.to_string(), fmt(h.edges[b]), fmt(h.edges[b + 1])],
                *e,
            ));
        }
    }
    rows
}

fn populations(mc: &McArgs, r: &ResampleArgs) -> Result<u64> {
    let p = mc.samples / r.population.max(1) as u64;
    if p < 2 {
        bail!("--samples must cover at least two populations of {}", r.population);
    }
    Ok(p)
}

fn walk(cmd: WalkCommand) -> Result<()> {
    let (names, rows, mc): (&[&str], Vec<EstimateRow>, McArgs) = match cmd {
        WalkCommand::RangeProb { k, a, mc } => {
            let pool = thread_pool(mc.parallelism)?;
            let e = run_chunks_parallel(&BridgeRange::new(k, a)?, mc.samples.max(1), mc.seed, &pool);
            (&["k", "A"], vec![EstimateRow::new([k.to_string(), fmt(a)], e)], mc)
        }
        WalkCommand::Survival { x, a, k, mc, resample } => {
            let pool = thread_pool(mc.parallelism)?;
            let e = if resample.resample {
                let est = ResampledWalk::new(x, a, k, 1, resample.population)?;
                run_chunks_parallel(&est, populations(&mc, &resample)?, mc.seed, &pool).survival
            } else {
                run_chunks_parallel(&WalkSurvival::new(x, a, k)?, mc.samples.max(1), mc.seed, &pool)
            };
            (&["x", "A", "k"], vec![EstimateRow::new([fmt(x), fmt(a), k.to_string()], e)], mc)
        }
        WalkCommand::Kernel { x, a, k, bins, mc, resample } => {
            let pool = thread_pool(mc.parallelism)?;
            let bins = bins.unwrap_or_else(|| default_bins(a));
            let h = if resample.resample {
                let est = ResampledWalk::new(x, a, k, bins, resample.population)?;
                run_chunks_parallel(&est, populations(&mc, &resample)?, mc.seed, &pool)
            } else {
                run_chunks_parallel(&WalkKernel::new(x, a, k, bins)?, mc.samples.max(1), mc.seed, &pool)
            };
            (&["quantity", "x", "A", "k", "bin_lo", "bin_hi"], kernel_rows(x, a, k, &h), mc)
        }
        WalkCommand::Localtime { k, a, bins, mc } => {
            let pool = thread_pool(mc.parallelism)?;
            let bins = bins.unwrap_or_else(|| default_bins(a));
            let p = run_chunks_parallel(&BridgeLocalTime::new(k, a, bins)?, mc.samples.max(1), mc.seed, &pool);
            let rows = p
                .visits
                .iter()
                .enumerate()
                .map(|(b, e)| EstimateRow::new([k.to_string(), fmt(a), fmt(p.edges[b]), fmt(p.edges[b + 1])], *e))
                .collect();
            (&["k", "A", "bin_lo", "bin_hi"], rows, mc)
        }
    };
    write_estimates(output(mc.csv.as_deref())?, names, &rows)?;
    Ok(())
}

fn spectral(cmd: SpectralCommand) -> Result<()> {
    match cmd {
        SpectralCommand::Lambda { h } => {
            let s = principal_lambda(h)?;
            print_json(&json!({ "H": h, "lambda": s.lambda, "delta": s.delta }))
        }
        SpectralCommand::Height { delta } => {
            print_json(&json!({ "delta": delta, "H": height_for_delta(delta)? }))
        }
        SpectralCommand::G { lambda, x, order } => {
            let closed = g_closed_with_error(lambda, x)?;
            let mut out = json!({
                "lambda": lambda,
                "x": x,
                "value": g_eval(lambda, x)?,
                "closed": closed.value,
                "closed_error_bound": closed.error_bound,
                "closed_reliable": closed.error_bound <= CANCELLATION_ALARM * closed.value.abs(),
            });
            if lambda <= 1.0 && x > 0.0 {
                let s = g_series(lambda, x, order)?;
                out["K"] = json!(order);
                out["series"] = json!(s.value);
                out["series_tail_bound"] = json!(s.tail_bound);
            }
            print_json(&out)
        }
        SpectralCommand::Roots { lambda, order } => {
            let sol = SpectralSolution::new(lambda, order, None)?;
            let k_max = order as i64;
            let roots: Vec<_> = (-k_max..=k_max)
                .map(|k| {
                    let s = sol.root(k).expect("index within order");
                    json!({ "k": k, "re": s.re, "im": s.im, "tau_residual": tau(lambda, s).norm() })
                })
                .collect();
            print_json(&json!({ "lambda": lambda, "delta": sol.delta, "K": order, "roots": roots }))
        }
        SpectralCommand::Curve { h_min, h_max, step, lambda_min, csv } => {
            let curve = eigenvalue_curve(h_min, h_max, step, lambda_min)?;
            let width = curve.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
            let mut w = csv::Writer::from_writer(output(csv.as_deref())?);
            let mut header = vec!["H".to_string()];
            header.extend((1..=width).map(|i| if i == 1 { "lambda_principal".into() } else { format!("lambda_{i}") }));
            w.write_record(&header)?;
            for (h, ls) in &curve {
                let mut rec = vec![fmt(*h)];
                rec.extend((0..width).map(|i| ls.get(i).map(|v| fmt(*v)).unwrap_or_default()));
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn sim(cmd: SimCommand) -> Result<()> {
    match cmd {
        SimCommand::Phase { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let outcome = run_phase(&cfg)?;
            mmwc_lab::phase::write_outputs(&cfg, &outcome)?;
            eprintln!(
                "{} records, {} failures; wrote {} and {}",
                outcome.records.len(),
                outcome.failures.len(),
                cfg.out_csv.display(),
                cfg.summary_path().display()
            );
            if !outcome.failure_rate_ok() {
                bail!("failure rate {:.3} exceeds the allowed share", outcome.summary.failure_rate);
            }
            Ok(())
        }
        SimCommand::WalkSuite { config } => {
            let cfg = WalkSuiteConfig::from_path(&config)?;
            let report = run_walk_suite(&cfg)?;
            if let Some(path) = &cfg.out_csv {
                write_estimates(output(Some(path))?, &SUITE_COLUMNS, &suite_rows(&report))?;
            }
            print_json(&serde_json::to_value(&report)?)
        }
        SimCommand::MomentCheck { n, c, seeds, seed, parallelism } => {
            let report = run_moment_check(n, c, seeds, seed, parallelism)?;
            print_json(&serde_json::to_value(&report)?)
        }
    }
}
