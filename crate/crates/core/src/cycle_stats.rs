//! Cycle-level statistics: excedance, uniformity, tilted bridges, first
//! moments of light-cycle counts, uniform subpath extraction and the
//! good-cycle predicate.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::f64::consts::E;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::special::{ln_falling_factorial, ln_gamma_p};
use crate::spectral::SpectralError;
use crate::sum::{compensated_prefix, compensated_sum};

/// Largest level accepted by moment queries.
pub const MAX_LEVEL: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CycleStatsError {
    NonPositiveLevel(f64),
    /// A parameter is outside its documented range.
    OutOfRange { what: &'static str, value: f64 },
    /// The input does not satisfy the operation's precondition.
    Precondition(&'static str),
    Spectral(SpectralError),
}

impl fmt::Display for CycleStatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveLevel(c) => write!(f, "level c must be positive, got {c}"),
            Self::OutOfRange { what, value } => write!(f, "{what} out of range: {value}"),
            Self::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Self::Spectral(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CycleStatsError {}

impl From<SpectralError> for CycleStatsError {
    fn from(e: SpectralError) -> Self {
        Self::Spectral(e)
    }
}

/// `n · mean weight` of a weight sequence.
pub fn cbar(weights: &[f64], n: usize) -> f64 {
    n as f64 * compensated_sum(weights.iter().copied()) / weights.len() as f64
}

/// Normalized increments `n w_i / c − 1`.
pub fn normalized_increments(weights: &[f64], n: usize, c: f64) -> Vec<f64> {
    let nf = n as f64;
    weights.iter().map(|&w| nf * w / c - 1.0).collect()
}

/// `Σ (n w_i / c − 1)`, which equals `k (c̄/c − 1)`.
pub fn excedance(weights: &[f64], c: f64, n: usize) -> Result<f64, CycleStatsError> {
    if !(c > 0.0) {
        return Err(CycleStatsError::NonPositiveLevel(c));
    }
    Ok(compensated_sum(normalized_increments(weights, n, c)))
}

/// Largest `|excedance|` over proper cyclic windows (length `1..k`).
pub fn max_cyclic_excedance(weights: &[f64], n: usize, c: f64) -> f64 {
    let k = weights.len();
    if k < 2 {
        return 0.0;
    }
    let inc = normalized_increments(weights, n, c);
    let closes = (c - cbar(weights, n)).abs() <= 1e-12 * c;
    if closes {
        // Periodic prefix: every proper window is a difference of two
        // prefix values, so the answer is the range.
        let p = compensated_prefix(&inc);
        let (lo, hi) = p[..k].iter().fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        return hi - lo;
    }
    let doubled: Vec<f64> = inc.iter().chain(inc.iter()).copied().collect();
    let p = compensated_prefix(&doubled);
    // Windows (i, j] with 0 < j − i < k and i < k; sliding min and max of
    // P_i over the admissible starts of each end j.
    let mut mins: VecDeque<usize> = VecDeque::new();
    let mut maxs: VecDeque<usize> = VecDeque::new();
    let mut next_start = 0usize;
    let mut best = 0.0f64;
    for j in 1..2 * k {
        let hi_start = (j - 1).min(k - 1);
        let lo_start = (j + 1).saturating_sub(k);
        while next_start <= hi_start {
            let i = next_start;
            while mins.back().is_some_and(|&b| p[b] >= p[i]) {
                mins.pop_back();
            }
            mins.push_back(i);
            while maxs.back().is_some_and(|&b| p[b] <= p[i]) {
                maxs.pop_back();
            }
            maxs.push_back(i);
            next_start += 1;
        }
        while mins.front().is_some_and(|&f| f < lo_start) {
            mins.pop_front();
        }
        while maxs.front().is_some_and(|&f| f < lo_start) {
            maxs.pop_front();
        }
        if let (Some(&mn), Some(&mx)) = (mins.front(), maxs.front()) {
            best = best.max(p[j] - p[mn]).max(p[mx] - p[j]);
        }
    }
    best
}

/// Whether no proper cyclic subpath has `c`-excedance outside `[−A, A]`.
pub fn is_uniform(weights: &[f64], n: usize, c: f64, a: f64) -> bool {
    max_cyclic_excedance(weights, n, c) <= a
}

/// A tilted bridge built from cycle weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeView {
    pub increments: Vec<f64>,
    /// `prefix[0] = 0`, `prefix[j] = Σ_{i≤j} increments`.
    pub prefix: Vec<f64>,
    pub range: f64,
    pub tilt: f64,
}

/// `W_j = Σ_{i≤j} (n w_i − c̄ − D/k)`, which ends at `−D`.
pub fn untilted_bridge(weights: &[f64], n: usize, d: f64) -> BridgeView {
    let k = weights.len();
    let cb = cbar(weights, n);
    let nf = n as f64;
    let shift = d / k as f64;
    let increments: Vec<f64> = weights.iter().map(|&w| nf * w - cb - shift).collect();
    let prefix = compensated_prefix(&increments);
    let (lo, hi) = prefix.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    BridgeView { increments, prefix, range: hi - lo, tilt: d }
}

/// Parameters of a first-moment query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub n: u64,
    pub k: u64,
    pub c: f64,
    pub delta: Option<f64>,
    pub a: Option<f64>,
}

impl MomentQuery {
    pub fn new(n: u64, k: u64, c: f64) -> Self {
        Self { n, k, c, delta: None, a: None }
    }

    fn validate(&self, vertices_needed: u64) -> Result<(), CycleStatsError> {
        if self.k < 2 {
            return Err(CycleStatsError::OutOfRange { what: "k", value: self.k as f64 });
        }
        if vertices_needed > self.n {
            return Err(CycleStatsError::OutOfRange { what: "k (exceeds n)", value: self.k as f64 });
        }
        if !(self.c >= 0.0 && self.c <= MAX_LEVEL) {
            return Err(CycleStatsError::OutOfRange { what: "c", value: self.c });
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(CycleStatsError::OutOfRange { what: "delta", value: d });
            }
        }
        if let Some(a) = self.a {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CycleStatsError::OutOfRange { what: "A", value: a });
            }
        }
        Ok(())
    }

    /// `ln P(Gamma(k) ≤ level · k / n)`.
    fn ln_light_prob(&self, level: f64) -> f64 {
        ln_gamma_p(self.k as f64, level * self.k as f64 / self.n as f64)
    }
}

/// `E Z^k_c = ((n)_k / k) P(Gamma(k) ≤ ck/n)`: expected number of `k`-cycles
/// with `c̄ ≤ c` in the directed mean-field model.
pub fn expected_light_cycles(q: &MomentQuery) -> Result<f64, CycleStatsError> {
    q.validate(q.k)?;
    if q.c == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_falling_factorial(q.n, q.k) - (q.k as f64).ln() + q.ln_light_prob(q.c)).exp())
}

/// `E Z̄^k_c = (n)_{k+1} P(Gamma(k) ≤ ck/n)`: expected number of light `k`-arc paths.
pub fn expected_light_paths(q: &MomentQuery) -> Result<f64, CycleStatsError> {
    q.validate(q.k + 1)?;
    if q.c == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_falling_factorial(q.n, q.k + 1) + q.ln_light_prob(q.c)).exp())
}

/// `E[Z^k_c − Z^k_{c(1−δ)}]`, the expected number of `k`-cycles with
/// `c(1−δ) < c̄ ≤ c`. Needs `q.delta`.
pub fn expected_light_band(q: &MomentQuery) -> Result<f64, CycleStatsError> {
    q.validate(q.k)?;
    let delta = q.delta.ok_or(CycleStatsError::Precondition("band query needs delta"))?;
    if q.c == 0.0 {
        return Ok(0.0);
    }
    let upper = q.ln_light_prob(q.c);
    let lower = q.ln_light_prob(q.c * (1.0 - delta));
    let ln_count = ln_falling_factorial(q.n, q.k) - (q.k as f64).ln();
    Ok((ln_count + upper).exp() * -(lower - upper).exp_m1())
}

/// Shape `((n)_k/n^k) (ce)^k [1 − (1−δ)^k] / k^{3/2}` that bounds
/// [`expected_light_band`] up to a constant.
pub fn light_band_envelope(q: &MomentQuery) -> Result<f64, CycleStatsError> {
    q.validate(q.k)?;
    let delta = q.delta.ok_or(CycleStatsError::Precondition("band query needs delta"))?;
    let k = q.k as f64;
    let ln = ln_falling_factorial(q.n, q.k) - k * (q.n as f64).ln() + k * (q.c * E).ln() - 1.5 * k.ln();
    Ok(ln.exp() * -(k * (-delta).ln_1p()).exp_m1())
}

/// `E Z^k_c(A) = E Z^k_c · R`, with `R` an estimate of the probability that a
/// `k`-bridge has range at most `A`.
pub fn expected_uniform_light_cycles(q: &MomentQuery, r: f64) -> Result<f64, CycleStatsError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(CycleStatsError::OutOfRange { what: "R", value: r });
    }
    Ok(expected_light_cycles(q)? * r)
}

/// Index intervals `[η̄_i, τ̄_i]` of minimal subpaths whose excedance process
/// `W` (prefix sums of `n w / c − 1`, `W_0 = 0`) falls from the band
/// `(x_i − 1, x_i]` to `(y_i, y_i + 1]`, with `(x_i, y_i) = −(i, i + A′)` for
/// `i = 0..=⌊A − A′⌋`. Subpath `i` uses `weights[η̄_i..τ̄_i]`.
pub fn extract_uniform_subpaths(
    weights: &[f64],
    n: usize,
    c: f64,
    a: f64,
    a_prime: f64,
) -> Result<Vec<(usize, usize)>, CycleStatsError> {
    if !(c > 0.0) {
        return Err(CycleStatsError::NonPositiveLevel(c));
    }
    if !(a_prime >= 2.0 && a_prime <= a) {
        return Err(CycleStatsError::Precondition("need 2 <= A' <= A"));
    }
    let w = compensated_prefix(&normalized_increments(weights, n, c));
    if !(w[w.len() - 1] < -a) {
        return Err(CycleStatsError::Precondition("path excedance must be below -A"));
    }
    let count = (a - a_prime).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let x = -(i as f64);
        let y = -(i as f64 + a_prime);
        let mut last_top: Option<usize> = None;
        let mut found = None;
        for (j, &v) in w.iter().enumerate() {
            if v > x - 1.0 && v <= x {
                last_top = Some(j);
            } else if v > y && v <= y + 1.0 {
                if let Some(top) = last_top {
                    found = Some((top, j));
                    break;
                }
            }
        }
        out.push(found.ok_or(CycleStatsError::Precondition("steps below -1 are impossible for nonnegative weights"))?);
    }
    Ok(out)
}

/// Boundary-distance profile `1{0≤x≤A} · min(x + 1, A − x + 1)`.
pub fn delta_profile(a: f64, x: f64) -> f64 {
    if (0.0..=a).contains(&x) {
        (x + 1.0).min(a - x + 1.0)
    } else {
        0.0
    }
}

/// The three conditions of the good-cycle predicate, evaluated separately.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    /// Interval height `⌈ln n⌉ − Δ`.
    pub a: f64,
    /// Level `c_A = 1/(e λ_A)`.
    pub c: f64,
    /// `c(1 − 1/k) ≤ c̄ ≤ c`.
    pub weight_window: bool,
    /// Range of the excedance process is at most `A − 2`.
    pub range_ok: bool,
    /// Every unit level bin is visited at most `Δ δ_A(x)^4` times.
    pub local_time_ok: bool,
    pub range: f64,
    /// Largest visits / cap ratio over the bins.
    pub worst_visit_ratio: f64,
}

impl GoodnessReport {
    pub fn is_good(&self) -> bool {
        self.weight_window && self.range_ok && self.local_time_ok
    }
}

/// Evaluate the good-cycle conditions for slack `Δ` on an `n`-vertex instance.
/// `lambda_of` maps an interval height to its principal eigenvalue.
pub fn goodness<F>(weights: &[f64], n: usize, delta: u32, lambda_of: F) -> Result<GoodnessReport, CycleStatsError>
where
    F: FnOnce(f64) -> Result<f64, SpectralError>,
{
    let ln_n = (n as f64).ln();
    if delta == 0 || delta as f64 > ln_n / 2.0 {
        return Err(CycleStatsError::OutOfRange { what: "Delta", value: delta as f64 });
    }
    let k = weights.len();
    if k < 2 {
        return Err(CycleStatsError::Precondition("a cycle has at least two arcs"));
    }
    let a = ln_n.ceil() - delta as f64;
    let c = 1.0 / (E * lambda_of(a)?);
    let cb = cbar(weights, n);
    let weight_window = c * (1.0 - 1.0 / k as f64) <= cb && cb <= c;

    let x = compensated_prefix(&normalized_increments(weights, n, c));
    let (lo, hi) = x.iter().fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    let range_ok = range <= a - 2.0;

    let shift = (a - hi - lo) / 2.0;
    let bins = a.ceil() as usize;
    let mut visits = alloc::vec![0u64; bins + 1];
    for &v in &x[1..] {
        let y = v + shift;
        let bin = y.ceil();
        if bin >= 1.0 && bin <= bins as f64 {
            visits[bin as usize] += 1;
        }
    }
    let mut worst = 0.0f64;
    for (b, &count) in visits.iter().enumerate().skip(1) {
        let cap = delta as f64 * delta_profile(a, b as f64).powi(4);
        worst = worst.max(if cap > 0.0 { count as f64 / cap } else if count > 0 { f64::INFINITY } else { 0.0 });
    }
    Ok(GoodnessReport {
        a,
        c,
        weight_window,
        range_ok,
        local_time_ok: worst <= 1.0,
        range,
        worst_visit_ratio: worst,
    })
}

/// Whether a cycle is `Δ`-good; see [`goodness`].
pub fn is_good<F>(weights: &[f64], n: usize, delta: u32, lambda_of: F) -> Result<bool, CycleStatsError>
where
    F: FnOnce(f64) -> Result<f64, SpectralError>,
{
    Ok(goodness(weights, n, delta, lambda_of)?.is_good())
}
