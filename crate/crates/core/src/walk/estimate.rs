//! Chunked plain Monte Carlo estimators.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{bin_edges, bin_index, fill_bridge_increments, McEstimate, WalkError};
use crate::rng::Stream;
use crate::spectral::principal_lambda;
use crate::sum::NeumaierSum;

/// Samples per chunk (one substream each).
pub const CHUNK_SAMPLES: u64 = 1 << 16;

/// Range-restricted bridge runs whose predicted acceptance
/// `λ_A^k k^{3/2} / A³` falls below this are refused.
pub const FEASIBILITY_THRESHOLD: f64 = 1e-6;

/// Per-chunk accumulator.
pub trait Tally: Sized {
    fn merge(&mut self, other: Self);
}

/// An estimator that can be evaluated chunk by chunk.
pub trait Chunked: Sync {
    type Tally: Tally + Send;
    type Output;

    /// Samples per chunk.
    fn chunk_size(&self) -> u64 {
        CHUNK_SAMPLES
    }

    fn empty(&self) -> Self::Tally;

    /// Draw `count` samples from `stream`.
    fn run_chunk(&self, stream: &mut Stream, count: u64) -> Self::Tally;

    fn finish(&self, tally: Self::Tally) -> Self::Output;

    /// `(chunk index, samples in chunk)` for a run of `samples`.
    fn chunk_plan(&self, samples: u64) -> Vec<(u64, u64)> {
        let size = self.chunk_size().max(1);
        (0..samples.div_ceil(size))
            .map(|i| (i, size.min(samples - i * size)))
            .collect()
    }
}

/// Evaluate all chunks in order on the current thread.
pub fn run_chunks<C: Chunked>(est: &C, samples: u64, seed: u64) -> C::Output {
    let mut total = est.empty();
    for (index, count) in est.chunk_plan(samples) {
        total.merge(est.run_chunk(&mut Stream::new(seed, index), count));
    }
    est.finish(total)
}

/// Accepted out of drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptCount {
    pub accepted: u64,
    pub total: u64,
}

impl Tally for AcceptCount {
    fn merge(&mut self, other: Self) {
        self.accepted += other.accepted;
        self.total += other.total;
    }
}

impl AcceptCount {
    pub fn estimate(&self) -> McEstimate {
        let est = McEstimate::proportion(self.accepted, self.total);
        est.with_acceptance(est.value)
    }
}

fn check_height(a: f64) -> Result<(), WalkError> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter { what: "A", value: a })
    }
}

fn check_start(x: f64, a: f64) -> Result<(), WalkError> {
    if (0.0..=a).contains(&x) {
        Ok(())
    } else {
        Err(WalkError::StartOutsideInterval { x, a })
    }
}

fn check_positive(what: &'static str, v: u64) -> Result<(), WalkError> {
    if v >= 1 {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter { what, value: v as f64 })
    }
}

/// Running min and max of a bridge built from `buf` (compensated prefix).
#[inline]
fn bridge_extent(buf: &[f64]) -> (f64, f64) {
    let mut acc = NeumaierSum::new();
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for &d in buf {
        acc.add(d);
        let v = acc.value();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Probability that the `k`-bridge has range at most `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeRange {
    pub k: usize,
    pub a: f64,
}

impl BridgeRange {
    pub fn new(k: usize, a: f64) -> Result<Self, WalkError> {
        check_positive("k", k as u64)?;
        check_height(a)?;
        Ok(Self { k, a })
    }
}

impl Chunked for BridgeRange {
    type Tally = AcceptCount;
    type Output = McEstimate;

    fn empty(&self) -> AcceptCount {
        AcceptCount::default()
    }

    fn run_chunk(&self, stream: &mut Stream, count: u64) -> AcceptCount {
        let mut buf = Vec::with_capacity(self.k);
        let mut accepted = 0;
        for _ in 0..count {
            fill_bridge_increments(stream, self.k, &mut buf);
            let (lo, hi) = bridge_extent(&buf);
            if hi - lo <= self.a {
                accepted += 1;
            }
        }
        AcceptCount { accepted, total: count }
    }

    fn finish(&self, tally: AcceptCount) -> McEstimate {
        tally.estimate()
    }
}

/// Probability that the walk from `x` stays in `[0, a]` through step `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkSurvival {
    pub x: f64,
    pub a: f64,
    pub k: usize,
}

impl WalkSurvival {
    pub fn new(x: f64, a: f64, k: usize) -> Result<Self, WalkError> {
        check_height(a)?;
        check_start(x, a)?;
        Ok(Self { x, a, k })
    }
}

/// Walk `k` steps from `x` inside `[0, a]`; the final position if it survived.
#[inline]
fn surviving_walk(stream: &mut Stream, x: f64, a: f64, k: usize) -> Option<f64> {
    let mut acc = NeumaierSum::new();
    acc.add(x);
    for _ in 0..k {
        acc.add(stream.exp1() - 1.0);
        let v = acc.value();
        if !(0.0..=a).contains(&v) {
            return None;
        }
    }
    Some(acc.value())
}

impl Chunked for WalkSurvival {
    type Tally = AcceptCount;
    type Output = McEstimate;

    fn empty(&self) -> AcceptCount {
        AcceptCount::default()
    }

    fn run_chunk(&self, stream: &mut Stream, count: u64) -> AcceptCount {
        let accepted = (0..count)
            .filter(|_| surviving_walk(stream, self.x, self.a, self.k).is_some())
            .count() as u64;
        AcceptCount { accepted, total: count }
    }

    fn finish(&self, tally: AcceptCount) -> McEstimate {
        tally.estimate()
    }
}

/// Terminal positions of surviving walks, binned over `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkKernel {
    pub x: f64,
    pub a: f64,
    pub k: usize,
    pub bins: usize,
}

impl WalkKernel {
    pub fn new(x: f64, a: f64, k: usize, bins: usize) -> Result<Self, WalkError> {
        check_height(a)?;
        check_start(x, a)?;
        check_positive("bins", bins as u64)?;
        Ok(Self { x, a, k, bins })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTally {
    pub survived: u64,
    pub total: u64,
    pub counts: Vec<u64>,
}

impl Tally for KernelTally {
    fn merge(&mut self, other: Self) {
        self.survived += other.survived;
        self.total += other.total;
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

/// Binned terminal density of walks that stayed in `[0, A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelHistogram {
    pub edges: Vec<f64>,
    /// Density of the end point given survival. NaN when nothing survived.
    pub conditional: Vec<McEstimate>,
    /// Density of surviving end points (conditional density times survival).
    pub unconditional: Vec<McEstimate>,
    pub survival: McEstimate,
}

impl KernelHistogram {
    /// Build from per-bin counts out of `survived` survivors and `total` draws.
    pub fn from_counts(edges: Vec<f64>, counts: &[u64], survived: u64, total: u64) -> Self {
        let survival = AcceptCount { accepted: survived, total }.estimate();
        let mut conditional = Vec::with_capacity(counts.len());
        let mut unconditional = Vec::with_capacity(counts.len());
        for (b, &c) in counts.iter().enumerate() {
            let width = edges[b + 1] - edges[b];
            let mut cond = McEstimate::proportion(c, survived);
            cond.value /= width;
            cond.std_error /= width;
            let mut unc = McEstimate::proportion(c, total);
            unc.value /= width;
            unc.std_error /= width;
            conditional.push(cond.with_acceptance(survival.value));
            unconditional.push(unc.with_acceptance(survival.value));
        }
        Self { edges, conditional, unconditional, survival }
    }
}

impl Chunked for WalkKernel {
    type Tally = KernelTally;
    type Output = KernelHistogram;

    fn empty(&self) -> KernelTally {
        KernelTally { survived: 0, total: 0, counts: vec![0; self.bins] }
    }

    fn run_chunk(&self, stream: &mut Stream, count: u64) -> KernelTally {
        let mut t = self.empty();
        t.total = count;
        for _ in 0..count {
            if let Some(end) = surviving_walk(stream, self.x, self.a, self.k) {
                t.survived += 1;
                if let Some(b) = bin_index(end, self.a, self.bins) {
                    t.counts[b] += 1;
                }
            }
        }
        t
    }

    fn finish(&self, t: KernelTally) -> KernelHistogram {
        KernelHistogram::from_counts(bin_edges(self.a, self.bins), &t.counts, t.survived, t.total)
    }
}

/// `λ_A^k k^{3/2} / A³`, the predicted acceptance rate of range-restricted
/// `k`-bridges.
pub fn predicted_bridge_acceptance(k: usize, a: f64) -> Result<f64, WalkError> {
    check_height(a)?;
    let lambda = principal_lambda(a)?.lambda;
    let kf = k as f64;
    Ok((kf * lambda.ln() + 1.5 * kf.ln() - 3.0 * a.ln()).exp())
}

/// Visits of recentered range-restricted bridges to bins of `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeLocalTime {
    pub k: usize,
    pub a: f64,
    pub bins: usize,
}

impl BridgeLocalTime {
    /// Refuses runs whose predicted acceptance is below [`FEASIBILITY_THRESHOLD`].
    pub fn new(k: usize, a: f64, bins: usize) -> Result<Self, WalkError> {
        check_positive("k", k as u64)?;
        check_positive("bins", bins as u64)?;
        let predicted = predicted_bridge_acceptance(k, a)?;
        if predicted < FEASIBILITY_THRESHOLD {
            return Err(WalkError::Infeasible { predicted, threshold: FEASIBILITY_THRESHOLD });
        }
        Ok(Self { k, a, bins })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTimeTally {
    pub accepted: u64,
    pub total: u64,
    /// Per-bin visit totals over accepted bridges.
    pub sum: Vec<u64>,
    /// Per-bin sums of squared per-bridge visit counts.
    pub sum_sq: Vec<u64>,
}

impl Tally for LocalTimeTally {
    fn merge(&mut self, other: Self) {
        self.accepted += other.accepted;
        self.total += other.total;
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
    }
}

/// Mean visits per bin of accepted bridges.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeProfile {
    pub edges: Vec<f64>,
    /// NaN when no bridge was accepted.
    pub visits: Vec<McEstimate>,
    pub acceptance: McEstimate,
}

impl Chunked for BridgeLocalTime {
    type Tally = LocalTimeTally;
    type Output = LocalTimeProfile;

    fn empty(&self) -> LocalTimeTally {
        LocalTimeTally { accepted: 0, total: 0, sum: vec![0; self.bins], sum_sq: vec![0; self.bins] }
    }

    fn run_chunk(&self, stream: &mut Stream, count: u64) -> LocalTimeTally {
        let mut t = self.empty();
        t.total = count;
        let mut buf = Vec::with_capacity(self.k);
        let mut path = Vec::with_capacity(self.k);
        let mut visits = vec![0u64; self.bins];
        for _ in 0..count {
            fill_bridge_increments(stream, self.k, &mut buf);
            let (lo, hi) = bridge_extent(&buf);
            if hi - lo > self.a {
                continue;
            }
            t.accepted += 1;
            let shift = (self.a - hi - lo) / 2.0;
            path.clear();
            let mut acc = NeumaierSum::new();
            for &d in &buf {
                acc.add(d);
                path.push(acc.value());
            }
            visits.iter_mut().for_each(|v| *v = 0);
            for &v in &path {
                let y = (v + shift).clamp(0.0, self.a);
                if let Some(b) = bin_index(y, self.a, self.bins) {
                    visits[b] += 1;
                }
            }
            for (b, &v) in visits.iter().enumerate() {
                t.sum[b] += v;
                t.sum_sq[b] += v * v;
            }
        }
        t
    }

    fn finish(&self, t: LocalTimeTally) -> LocalTimeProfile {
        let acceptance = AcceptCount { accepted: t.accepted, total: t.total }.estimate();
        let n = t.accepted as f64;
        let visits = t
            .sum
            .iter()
            .zip(&t.sum_sq)
            .map(|(&s, &s2)| {
                let mean = s as f64 / n;
                let var = if t.accepted > 1 { (s2 as f64 / n - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 };
                McEstimate {
                    value: mean,
                    std_error: (var / n).sqrt(),
                    samples: t.accepted,
                    acceptance_rate: Some(acceptance.value),
                }
            })
            .collect();
        LocalTimeProfile { edges: bin_edges(self.a, self.bins), visits, acceptance }
    }
}

/// Fraction of `k`-bridges with range at most `a`.
pub fn estimate_range_prob(k: usize, a: f64, samples: u64, seed: u64) -> Result<McEstimate, WalkError> {
    check_positive("samples", samples)?;
    Ok(run_chunks(&BridgeRange::new(k, a)?, samples, seed))
}

/// Fraction of walks from `x` that stay in `[0, a]` through step `k`.
pub fn estimate_survival(x: f64, a: f64, k: usize, samples: u64, seed: u64) -> Result<McEstimate, WalkError> {
    check_positive("samples", samples)?;
    Ok(run_chunks(&WalkSurvival::new(x, a, k)?, samples, seed))
}

/// Binned end-point density of walks from `x` that stay in `[0, a]`.
pub fn estimate_kernel(
    x: f64,
    a: f64,
    k: usize,
    bins: usize,
    samples: u64,
    seed: u64,
) -> Result<KernelHistogram, WalkError> {
    check_positive("samples", samples)?;
    Ok(run_chunks(&WalkKernel::new(x, a, k, bins)?, samples, seed))
}

/// Mean visits per bin of recentered `k`-bridges with range at most `a`.
pub fn local_time_profile(k: usize, a: f64, bins: usize, samples: u64, seed: u64) -> Result<LocalTimeProfile, WalkError> {
    check_positive("samples", samples)?;
    Ok(run_chunks(&BridgeLocalTime::new(k, a, bins)?, samples, seed))
}
