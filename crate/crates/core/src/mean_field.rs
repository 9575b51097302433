//! The mean-field distance model: complete (di)graphs with i.i.d. Exp(1) weights.

use alloc::vec::Vec;
use core::fmt;

use crate::graph::WeightedDigraph;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub n: usize,
    pub directed: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooFewVertices(pub usize);

impl fmt::Display for TooFewVertices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mean-field instance needs n >= 2, got {}", self.0)
    }
}

impl core::error::Error for TooFewVertices {}

/// Build the instance described by `spec`.
///
/// Weights are drawn from stream `(seed, 0)` in row-major order over ordered
/// pairs (directed) or over pairs `i < j` (undirected, shared by both arcs).
pub fn generate(spec: &InstanceSpec) -> Result<WeightedDigraph, TooFewVertices> {
    if spec.n < 2 {
        return Err(TooFewVertices(spec.n));
    }
    let mut s = Stream::new(spec.seed, 0);
    Ok(if spec.directed {
        WeightedDigraph::complete_directed(spec.n, |_, _| s.exp1())
    } else {
        WeightedDigraph::complete_undirected(spec.n, |_, _| s.exp1())
    })
}

/// `count` i.i.d. Exp(1) draws from stream `(seed, 0)`.
pub fn exp_stream(seed: u64, count: usize) -> Vec<f64> {
    let mut s = Stream::new(seed, 0);
    (0..count).map(|_| s.exp1()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_shape() {
        let g = generate(&InstanceSpec { n: 3, directed: true, seed: 1 }).unwrap();
        assert_eq!(g.arc_count(), 6);
        assert!(g.arcs().all(|a| a.weight > 0.0));
        let u = generate(&InstanceSpec { n: 4, directed: false, seed: 1 }).unwrap();
        assert_eq!(u.arc_count(), 12);
        for a in u.arcs() {
            assert_eq!(u.weight(a.head as usize, a.tail as usize), Some(a.weight));
        }
    }

    #[test]
    fn rejects_tiny_n() {
        assert_eq!(generate(&InstanceSpec { n: 1, directed: true, seed: 0 }), Err(TooFewVertices(1)));
    }

    #[test]
    fn deterministic() {
        let spec = InstanceSpec { n: 6, directed: true, seed: 42 };
        assert_eq!(generate(&spec), generate(&spec));
        assert_eq!(exp_stream(3, 5), exp_stream(3, 5));
        assert!(exp_stream(3, 0).is_empty());
    }
}
