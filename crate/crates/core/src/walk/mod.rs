//! Exp-minus-one random walks and bridges: sampling, crossing counts and
//! Monte Carlo estimators for range-restricted events.
//!
//! Every estimator splits its samples into fixed-size chunks, each driven by
//! its own substream `(seed, chunk index)`. Chunk results are merged in index
//! order, so the outcome depends only on `(seed, samples)` and not on how the
//! chunks are scheduled.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::Stream;
use crate::spectral::SpectralError;
use crate::sum::compensated_prefix;

mod estimate;
mod resample;

pub use estimate::{
    estimate_kernel, estimate_range_prob, estimate_survival, local_time_profile, predicted_bridge_acceptance, run_chunks,
    AcceptCount, BridgeLocalTime, BridgeRange, Chunked, KernelHistogram, KernelTally, LocalTimeProfile, LocalTimeTally,
    Tally, WalkKernel, WalkSurvival, CHUNK_SAMPLES, FEASIBILITY_THRESHOLD,
};
pub use resample::{
    estimate_kernel_resampled, estimate_survival_resampled, PopulationTally, ResampledWalk, DEFAULT_POPULATION,
};

#[derive(Debug, Clone, PartialEq)]
pub enum WalkError {
    StartOutsideInterval { x: f64, a: f64 },
    InvalidParameter { what: &'static str, value: f64 },
    /// Predicted acceptance of range-restricted bridges is below the guard.
    Infeasible { predicted: f64, threshold: f64 },
    Spectral(SpectralError),
}

impl fmt::Display for WalkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StartOutsideInterval { x, a } => write!(f, "start {x} is outside [0, {a}]"),
            Self::InvalidParameter { what, value } => write!(f, "invalid {what}: {value}"),
            Self::Infeasible { predicted, threshold } => write!(
                f,
                "predicted acceptance {predicted:.3e} is below {threshold:.0e}; reduce k or k/A^2"
            ),
            Self::Spectral(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WalkError {}

impl From<SpectralError> for WalkError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub acceptance_rate: Option<f64>,
}

impl McEstimate {
    /// Fraction `hits / total` with its binomial standard error.
    pub fn proportion(hits: u64, total: u64) -> Self {
        let p = hits as f64 / total as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / total as f64).sqrt(),
            samples: total,
            acceptance_rate: None,
        }
    }

    pub fn with_acceptance(mut self, rate: f64) -> Self {
        self.acceptance_rate = Some(rate);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Walk,
    /// Returns to its start at time `k`; crossings are counted cyclically.
    Bridge,
}

/// A sampled path `X_0..X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    pub start: f64,
    pub increments: Vec<f64>,
    /// `prefix[j] = X_j`, with `prefix[0] = start`.
    pub prefix: Vec<f64>,
    pub kind: PathKind,
}

impl WalkPath {
    pub fn from_increments(start: f64, increments: Vec<f64>, kind: PathKind) -> Self {
        let prefix = compensated_prefix(&increments).into_iter().map(|v| start + v).collect();
        Self { start, increments, prefix, kind }
    }

    pub fn k(&self) -> usize {
        self.increments.len()
    }

    pub fn end(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.prefix.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

/// Walk from `start` with `k` i.i.d. steps `u − 1`, `u ~ Exp(1)`.
pub fn sample_walk(start: f64, k: usize, seed: u64) -> WalkPath {
    let mut stream = Stream::new(seed, 0);
    let increments = (0..k).map(|_| stream.exp1() - 1.0).collect();
    WalkPath::from_increments(start, increments, PathKind::Walk)
}

/// Exact `k`-bridge from the origin: `e_i k / Σ e − 1` with `e_i ~ Exp(1)`.
pub fn sample_bridge(k: usize, seed: u64) -> WalkPath {
    let mut stream = Stream::new(seed, 0);
    let mut e = Vec::with_capacity(k);
    fill_bridge_increments(&mut stream, k, &mut e);
    WalkPath::from_increments(0.0, e, PathKind::Bridge)
}

/// Overwrite `buf` with the increments of a fresh `k`-bridge.
pub(crate) fn fill_bridge_increments(stream: &mut Stream, k: usize, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend((0..k).map(|_| stream.exp1()));
    let total = crate::sum::compensated_sum(buf.iter().copied());
    let scale = k as f64 / total;
    for v in buf.iter_mut() {
        *v = *v * scale - 1.0;
    }
}

/// Completed up-crossings (from below `x` to above `y`) and down-crossings
/// (from above `y` to below `x`). Bridges are traversed cyclically, so their
/// two counts agree.
pub fn count_crossings(path: &WalkPath, x: f64, y: f64) -> Result<(u64, u64), WalkError> {
    if !(x < y) {
        return Err(WalkError::InvalidParameter { what: "band (need x < y)", value: y - x });
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Side {
        Low,
        High,
    }
    let side = |v: f64| {
        if v < x {
            Some(Side::Low)
        } else if v > y {
            Some(Side::High)
        } else {
            None
        }
    };
    let (mut up, mut down) = (0u64, 0u64);
    let mut state: Option<Side> = None;
    let mut visit = |v: f64| {
        if let Some(s) = side(v) {
            match (state, s) {
                (Some(Side::Low), Side::High) => up += 1,
                (Some(Side::High), Side::Low) => down += 1,
                _ => {}
            }
            state = Some(s);
        }
    };
    match path.kind {
        PathKind::Walk => path.prefix.iter().for_each(|&v| visit(v)),
        PathKind::Bridge => {
            let k = path.k();
            let values = &path.prefix[..k.max(1)];
            if let Some(first) = values.iter().position(|&v| side(v).is_some()) {
                for t in 0..=values.len() {
                    visit(values[(first + t) % values.len()]);
                }
            }
        }
    }
    Ok((up, down))
}

/// Index of the histogram bin of `v` among `bins` equal bins over `[0, a]`.
/// Bins are half-open `[lo, hi)` except the last, which is closed.
#[inline]
pub fn bin_index(v: f64, a: f64, bins: usize) -> Option<usize> {
    if !(v >= 0.0 && v <= a) {
        return None;
    }
    Some(((v / a * bins as f64) as usize).min(bins - 1))
}

/// Bin edges `0, a/bins, …, a`.
pub fn bin_edges(a: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| a * i as f64 / bins as f64).collect()
}

/// Default bin count `⌈a⌉`.
pub fn default_bins(a: f64) -> usize {
    (a.ceil() as usize).max(1)
}
