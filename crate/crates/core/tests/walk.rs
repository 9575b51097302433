use mmwc_core::cycle_stats::delta_profile;
use mmwc_core::principal_lambda;
use mmwc_core::spectral::g_eval;
use mmwc_core::walk::{
    count_crossings, estimate_kernel, estimate_kernel_resampled, estimate_range_prob, estimate_survival,
    estimate_survival_resampled, local_time_profile, run_chunks, sample_bridge, sample_walk, BridgeRange, PathKind,
    WalkError, WalkPath,
};
use proptest::prelude::*;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn walk_end_points_obey_the_central_limit_band() {
    let (k, n) = (100, 100_000u64);
    let ends: Vec<f64> = (0..n).map(|s| sample_walk(2.0, k, s).end() - 2.0).collect();
    let (m, v) = mean_var(&ends);
    assert!(m.abs() <= 3.0 * (k as f64 / n as f64).sqrt(), "mean {m}");
    assert!((v / k as f64 - 1.0).abs() < 0.03, "variance {v}");
}

#[test]
fn walk_paths_are_well_formed() {
    let p = sample_walk(1.5, 0, 3);
    assert_eq!(p.prefix, [1.5]);
    let p = sample_walk(0.0, 500, 4);
    assert!(p.increments.iter().all(|&d| d > -1.0));
    for j in 1..=500 {
        assert!((p.prefix[j] - p.prefix[j - 1] - p.increments[j - 1]).abs() < 1e-12);
    }
}

#[test]
fn bridges_return_to_the_origin() {
    for s in 0..200 {
        let b = sample_bridge(1 + s as usize % 300, s);
        assert_eq!(b.prefix[0], 0.0);
        assert!(b.end().abs() <= 1e-12, "{}", b.end());
        assert!(b.increments.iter().all(|&d| d > -1.0));
    }
    for s in 0..500 {
        assert!(sample_bridge(2, s).range() < 1.0);
    }
}

#[test]
fn bridge_midpoint_has_brownian_bridge_variance() {
    let (k, n) = (50, 100_000u64);
    let mids: Vec<f64> = (0..n).map(|s| sample_bridge(k, s).prefix[k / 2] / (k as f64).sqrt()).collect();
    let (_, v) = mean_var(&mids);
    // Exact for the exchangeable bridge: j(k−j)/(k(k+1)).
    let exact = 25.0 * 25.0 / (50.0 * 51.0);
    let se = exact * (2.0 / n as f64).sqrt();
    assert!((v - exact).abs() <= 3.0 * se, "{v} vs {exact}");
    assert!((exact - 0.25).abs() < 0.01);
}

#[test]
fn permuted_bridges_have_the_same_range_law() {
    let (k, n) = (40, 4000u64);
    let plain: Vec<f64> = (0..n).map(|s| sample_bridge(k, s).range()).collect();
    let permuted: Vec<f64> = (n..2 * n)
        .map(|s| {
            let b = sample_bridge(k, s);
            let inc: Vec<f64> = (0..k).map(|i| b.increments[(7 * i + 3) % k]).collect();
            WalkPath::from_increments(0.0, inc, PathKind::Bridge).range()
        })
        .collect();
    let d = ks_statistic(plain, permuted);
    assert!(d < 1.628 * (2.0 / n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn range_probability_trivial_cases() {
    assert_eq!(estimate_range_prob(2, 1.0, 10_000, 1).unwrap().value, 1.0);
    assert_eq!(estimate_range_prob(30, 30.0, 10_000, 1).unwrap().value, 1.0);
}

#[test]
fn range_probability_is_monotone() {
    let samples = 200_000;
    let mut prev = 1.0;
    for k in [8, 16, 32, 64] {
        let e = estimate_range_prob(k, 4.0, samples, 10 + k as u64).unwrap();
        assert!(e.value <= prev + 3.0 * e.std_error, "k={k}");
        prev = e.value;
    }
    // A common seed gives the same bridges, so monotonicity in A is exact.
    let by_a: Vec<f64> = [2.0, 3.0, 4.0, 6.0].iter().map(|&a| estimate_range_prob(32, a, samples, 5).unwrap().value).collect();
    assert!(by_a.windows(2).all(|w| w[0] <= w[1]), "{by_a:?}");
}

#[test]
fn estimators_are_deterministic_in_the_seed() {
    let a = estimate_range_prob(40, 5.0, 150_000, 9).unwrap();
    let b = estimate_range_prob(40, 5.0, 150_000, 9).unwrap();
    let c = estimate_range_prob(40, 5.0, 150_000, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let est = BridgeRange::new(40, 5.0).unwrap();
    assert_eq!(run_chunks(&est, 150_000, 9), a);
    let k1 = estimate_kernel(2.0, 5.0, 10, 5, 70_000, 1).unwrap();
    let k2 = estimate_kernel(2.0, 5.0, 10, 5, 70_000, 1).unwrap();
    assert_eq!(k1, k2);
}

#[test]
fn survival_trivial_and_one_step_cases() {
    assert_eq!(estimate_survival(1.0, 3.0, 0, 1000, 1).unwrap().value, 1.0);
    let e = estimate_survival(2.0, 4.0, 1, 400_000, 2).unwrap();
    let exact = 1.0 - (-3.0f64).exp();
    assert!((e.value - exact).abs() <= 4.0 * e.std_error, "{e:?}");
    assert!(matches!(estimate_survival(5.0, 4.0, 1, 10, 1), Err(WalkError::StartOutsideInterval { .. })));
}

#[test]
fn kernel_at_time_zero_is_a_point_mass() {
    let h = estimate_kernel(2.3, 4.0, 0, 4, 1000, 1).unwrap();
    assert_eq!(h.survival.value, 1.0);
    for (b, e) in h.conditional.iter().enumerate() {
        assert_eq!(e.value, if b == 2 { 1.0 } else { 0.0 });
    }
}

/// Bin averages of `y ↦ g_λ(A − y)`, normalized to unit mass.
fn reflected_eigen_profile(a: f64, bins: usize) -> Vec<f64> {
    let lambda = principal_lambda(a).unwrap().lambda;
    let width = a / bins as f64;
    let m = 200;
    let raw: Vec<f64> = (0..bins)
        .map(|b| {
            (0..m).map(|i| g_eval(lambda, a - (b as f64 + (i as f64 + 0.5) / m as f64) * width).unwrap()).sum::<f64>()
                / m as f64
        })
        .collect();
    let mass: f64 = raw.iter().sum::<f64>() * width;
    raw.iter().map(|v| v / mass).collect()
}

#[test]
fn long_run_end_point_law_is_the_reflected_eigenfunction() {
    let (a, k, bins) = (10.0, 300, 10);
    let target = reflected_eigen_profile(a, bins);
    for x in [5.0, 1.0] {
        let h = estimate_kernel_resampled(x, a, k, bins, 16, 4096, 7).unwrap();
        for (b, e) in h.conditional.iter().enumerate() {
            assert!((e.value - target[b]).abs() <= 4.0 * e.std_error + 1e-3, "x={x} bin {b}: {e:?} vs {}", target[b]);
        }
        // The walk drifts to the lower edge before it is killed, so the law leans low.
        let (lo, hi) = (h.conditional[0], h.conditional[bins - 1]);
        assert!(lo.value - hi.value > 5.0 * (lo.std_error.powi(2) + hi.std_error.powi(2)).sqrt());
    }
}

#[test]
fn long_run_end_point_law_follows_the_boundary_profile() {
    let (a, k, bins) = (10.0, 300, 10);
    let h = estimate_kernel_resampled(5.0, a, k, bins, 16, 4096, 8).unwrap();
    let ratios: Vec<f64> = (1..bins - 1)
        .map(|b| {
            let mid = (b as f64 + 0.5) * a / bins as f64;
            h.conditional[b].value / (delta_profile(a, mid) / (a * a))
        })
        .collect();
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 4.0, "{ratios:?}");
}

#[test]
fn survival_decay_matches_the_principal_eigenvalue() {
    let (a, x) = (10.0, 5.0);
    let ks = [200, 400, 600, 800];
    let logs: Vec<f64> =
        ks.iter().map(|&k| estimate_survival_resampled(x, a, k, 16, 4096, 100 + k as u64).unwrap().value.ln()).collect();
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let fit = mmwc_core::stats::linear_fit(&xs, &logs).unwrap();
    let target = principal_lambda(a).unwrap().lambda.ln();
    assert!((fit.slope / target - 1.0).abs() <= 0.05, "{} vs {target}", fit.slope);
}

#[test]
fn survival_decay_exponents_increase_with_height() {
    let mut prev = f64::NEG_INFINITY;
    for a in [6.0f64, 8.0, 10.0, 12.0] {
        let (k1, k2) = ((2.0 * a * a) as usize, (4.0 * a * a) as usize);
        let s1 = estimate_survival_resampled(a / 2.0, a, k1, 12, 4096, 1).unwrap().value;
        let s2 = estimate_survival_resampled(a / 2.0, a, k2, 12, 4096, 2).unwrap().value;
        let exponent = (s2.ln() - s1.ln()) / (k2 - k1) as f64;
        assert!(exponent > prev, "A={a}: {exponent} after {prev}");
        prev = exponent;
    }
}

#[test]
fn local_time_bins_sum_to_the_bridge_length() {
    let p = local_time_profile(32, 6.0, 6, 100_000, 3).unwrap();
    let total: f64 = p.visits.iter().map(|v| v.value).sum();
    assert!((total - 32.0).abs() < 1e-9, "{total}");
    assert!(p.acceptance.value > 0.0 && p.acceptance.value < 1.0);
    assert!(matches!(local_time_profile(2000, 4.0, 4, 1000, 1), Err(WalkError::Infeasible { .. })));
}

#[test]
fn crossing_examples() {
    let up = WalkPath::from_increments(0.0, vec![1.0; 10], PathKind::Walk);
    assert_eq!(count_crossings(&up, 2.5, 6.5).unwrap(), (1, 0));
    let saw = WalkPath::from_increments(0.0, vec![3.0, -3.0, 3.0, -3.0, 3.0], PathKind::Walk);
    assert_eq!(count_crossings(&saw, 1.0, 2.0).unwrap(), (3, 2));
    let saw = WalkPath::from_increments(0.0, vec![3.0, -3.0, 3.0, -3.0], PathKind::Bridge);
    assert_eq!(count_crossings(&saw, 1.0, 2.0).unwrap(), (2, 2));
    assert!(count_crossings(&saw, 2.0, 2.0).is_err());
}

/// Crossings from the compressed sequence of band sides, closed up for bridges.
fn crossings_oracle(path: &WalkPath, x: f64, y: f64) -> (u64, u64) {
    let values = match path.kind {
        PathKind::Walk => &path.prefix[..],
        PathKind::Bridge => &path.prefix[..path.k()],
    };
    let mut sides: Vec<bool> = values.iter().filter(|&&v| v < x || v > y).map(|&v| v > y).collect();
    if path.kind == PathKind::Bridge && !sides.is_empty() {
        sides.push(sides[0]);
    }
    let up = sides.windows(2).filter(|w| !w[0] && w[1]).count() as u64;
    let down = sides.windows(2).filter(|w| w[0] && !w[1]).count() as u64;
    (up, down)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bridge_crossings_alternate(k in 2usize..200, seed in any::<u64>(), lo in 0.0f64..1.0, width in 0.05f64..0.9) {
        let b = sample_bridge(k, seed);
        let r = b.range();
        let (x, y) = (b.min() + lo * r, b.min() + (lo + width * (1.0 - lo)) * r);
        prop_assume!(x < y);
        let (up, down) = count_crossings(&b, x, y).unwrap();
        prop_assert!(up.abs_diff(down) <= 1);
        prop_assert_eq!((up, down), crossings_oracle(&b, x, y));
    }

    #[test]
    fn walk_crossings_match_the_oracle(k in 0usize..200, seed in any::<u64>(), x in -5.0f64..5.0, width in 0.01f64..4.0) {
        let p = sample_walk(0.0, k, seed);
        let (up, down) = count_crossings(&p, x, x + width).unwrap();
        prop_assert!(up.abs_diff(down) <= 1);
        prop_assert_eq!((up, down), crossings_oracle(&p, x, x + width));
    }
}
