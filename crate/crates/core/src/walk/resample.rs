//! Fixed-population resampling for walks killed outside `[0, A]`.
//!
//! A population of walkers steps in lockstep. After each step the killed
//! walkers are replaced by copies of uniformly chosen survivors and the
//! surviving fraction is recorded. The product of those fractions is an
//! unbiased estimate of the survival probability, and the final population
//! samples the end point given survival. This reaches survival probabilities
//! far below what plain sampling can resolve.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::estimate::{run_chunks, Chunked, KernelHistogram, Tally};
use super::{bin_edges, bin_index, McEstimate, WalkError};
use crate::rng::Stream;

pub const DEFAULT_POPULATION: usize = 4096;

/// Walk from `x` killed outside `[0, a]`, estimated by resampled populations.
/// Each chunk is one population of `population` walkers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampledWalk {
    pub x: f64,
    pub a: f64,
    pub k: usize,
    pub bins: usize,
    pub population: usize,
}

impl ResampledWalk {
    pub fn new(x: f64, a: f64, k: usize, bins: usize, population: usize) -> Result<Self, WalkError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(WalkError::InvalidParameter { what: "A", value: a });
        }
        if !(0.0..=a).contains(&x) {
            return Err(WalkError::StartOutsideInterval { x, a });
        }
        if bins == 0 {
            return Err(WalkError::InvalidParameter { what: "bins", value: 0.0 });
        }
        if population < 2 {
            return Err(WalkError::InvalidParameter { what: "population", value: population as f64 });
        }
        Ok(Self { x, a, k, bins, population })
    }

    /// Survival estimate of one population and its end-point bin fractions
    /// (`None` if the population died out).
    fn run_population(&self, stream: &mut Stream) -> (f64, Option<Vec<f64>>) {
        let p = self.population;
        let mut walkers = vec![self.x; p];
        let mut ln_survival = 0.0;
        for _ in 0..self.k {
            let mut alive = 0usize;
            for i in 0..p {
                let v = walkers[i] + stream.exp1() - 1.0;
                if (0.0..=self.a).contains(&v) {
                    walkers[alive] = v;
                    alive += 1;
                }
            }
            if alive == 0 {
                return (0.0, None);
            }
            ln_survival += (alive as f64 / p as f64).ln();
            for i in alive..p {
                walkers[i] = walkers[stream.below(alive as u64) as usize];
            }
        }
        let mut fractions = vec![0.0; self.bins];
        for &v in &walkers {
            if let Some(b) = bin_index(v, self.a, self.bins) {
                fractions[b] += 1.0 / p as f64;
            }
        }
        (ln_survival.exp(), Some(fractions))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTally {
    pub populations: u64,
    pub extinct: u64,
    pub sum: f64,
    pub sum_sq: f64,
    /// Per-bin sums of end-point fractions over surviving populations.
    pub bin_sum: Vec<f64>,
    pub bin_sum_sq: Vec<f64>,
}

impl Tally for PopulationTally {
    fn merge(&mut self, other: Self) {
        self.populations += other.populations;
        self.extinct += other.extinct;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        for (a, b) in self.bin_sum.iter_mut().zip(other.bin_sum) {
            *a += b;
        }
        for (a, b) in self.bin_sum_sq.iter_mut().zip(other.bin_sum_sq) {
            *a += b;
        }
    }
}

fn mean_and_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0) } else { f64::NAN };
    (mean, (var / nf).sqrt())
}

impl Chunked for ResampledWalk {
    type Tally = PopulationTally;
    type Output = KernelHistogram;

    fn chunk_size(&self) -> u64 {
        1
    }

    fn empty(&self) -> PopulationTally {
        PopulationTally {
            populations: 0,
            extinct: 0,
            sum: 0.0,
            sum_sq: 0.0,
            bin_sum: vec![0.0; self.bins],
            bin_sum_sq: vec![0.0; self.bins],
        }
    }

    fn run_chunk(&self, stream: &mut Stream, count: u64) -> PopulationTally {
        let mut t = self.empty();
        for _ in 0..count {
            let (est, fractions) = self.run_population(stream);
            t.populations += 1;
            t.sum += est;
            t.sum_sq += est * est;
            match fractions {
                Some(f) => {
                    for (b, v) in f.into_iter().enumerate() {
                        t.bin_sum[b] += v;
                        t.bin_sum_sq[b] += v * v;
                    }
                }
                None => t.extinct += 1,
            }
        }
        t
    }

    fn finish(&self, t: PopulationTally) -> KernelHistogram {
        let draws = t.populations * self.population as u64;
        let (s, s_se) = mean_and_se(t.sum, t.sum_sq, t.populations);
        let survival = McEstimate { value: s, std_error: s_se, samples: draws, acceptance_rate: None };
        let edges = bin_edges(self.a, self.bins);
        let surviving = t.populations - t.extinct;
        let mut conditional = Vec::with_capacity(self.bins);
        let mut unconditional = Vec::with_capacity(self.bins);
        for b in 0..self.bins {
            let width = edges[b + 1] - edges[b];
            let (f, f_se) = mean_and_se(t.bin_sum[b], t.bin_sum_sq[b], surviving);
            let (c, c_se) = (f / width, f_se / width);
            conditional.push(McEstimate { value: c, std_error: c_se, samples: draws, acceptance_rate: None });
            unconditional.push(McEstimate {
                value: c * s,
                std_error: ((s * c_se).powi(2) + (c * s_se).powi(2)).sqrt(),
                samples: draws,
                acceptance_rate: None,
            });
        }
        KernelHistogram { edges, conditional, unconditional, survival }
    }
}

fn check_populations(populations: u64) -> Result<(), WalkError> {
    if populations >= 2 {
        Ok(())
    } else {
        Err(WalkError::InvalidParameter { what: "populations", value: populations as f64 })
    }
}

/// Survival probability through step `k` from resampled populations.
pub fn estimate_survival_resampled(
    x: f64,
    a: f64,
    k: usize,
    populations: u64,
    population: usize,
    seed: u64,
) -> Result<McEstimate, WalkError> {
    check_populations(populations)?;
    let est = ResampledWalk::new(x, a, k, 1, population)?;
    Ok(run_chunks(&est, populations, seed).survival)
}

/// End-point density of surviving walks from resampled populations.
pub fn estimate_kernel_resampled(
    x: f64,
    a: f64,
    k: usize,
    bins: usize,
    populations: u64,
    population: usize,
    seed: u64,
) -> Result<KernelHistogram, WalkError> {
    check_populations(populations)?;
    Ok(run_chunks(&ResampledWalk::new(x, a, k, bins, population)?, populations, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::estimate_survival;

    #[test]
    fn one_step_survival_matches_closed_form() {
        let exact = 1.0 - (-3.0f64).exp();
        let e = estimate_survival_resampled(2.0, 4.0, 1, 64, 1024, 3).unwrap();
        assert!((e.value - exact).abs() < 4.0 * e.std_error.max(1e-4), "{e:?}");
    }

    #[test]
    fn agrees_with_plain_sampling_when_both_resolve() {
        let plain = estimate_survival(3.0, 6.0, 30, 200_000, 5).unwrap();
        let res = estimate_survival_resampled(3.0, 6.0, 30, 64, 2048, 6).unwrap();
        let se = (plain.std_error.powi(2) + res.std_error.powi(2)).sqrt();
        assert!((plain.value - res.value).abs() < 4.0 * se, "{plain:?} {res:?}");
    }

    #[test]
    fn conditional_density_integrates_to_one() {
        let h = estimate_kernel_resampled(2.0, 4.0, 20, 8, 8, 512, 1).unwrap();
        let mass: f64 = h.conditional.iter().map(|e| e.value * 0.5).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
