//! Exact minimum mean-weight cycle solvers.
//!
//! Both solvers work one strongly connected component at a time and return
//! the best cycle over all components. Ties between components go to the one
//! with the smallest vertex id.

mod howard;
mod karp;

use alloc::vec::Vec;
use core::fmt;

use crate::graph::{cycle_from_vertices, Cycle, GraphError, WeightedDigraph};
use crate::mean_field::{generate, InstanceSpec};
use crate::scc::strong_components;
use crate::sum::compensated_sum;

pub use howard::howard_mmc;
pub use karp::karp_mmc;

/// Absolute slack used when comparing cycle means of O(1)-weight graphs.
pub const MEAN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    NoCycle,
    /// Howard's iteration did not settle within the sweep budget.
    IterationLimit { sweeps: usize },
    Graph(GraphError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoCycle => write!(f, "graph has no cycle"),
            Self::IterationLimit { sweeps } => {
                write!(f, "policy iteration did not converge after {sweeps} sweeps")
            }
            Self::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolverError {}

impl From<GraphError> for SolverError {
    fn from(e: GraphError) -> Self {
        Self::Graph(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Karp,
    Howard,
}

impl Solver {
    pub fn solve(self, g: &WeightedDigraph) -> Result<MmwcResult, SolverError> {
        match self {
            Solver::Karp => karp_mmc(g),
            Solver::Howard => howard_mmc(g),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Solver::Karp => "karp",
            Solver::Howard => "howard",
        }
    }
}

impl core::str::FromStr for Solver {
    type Err = UnknownSolver;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "karp" => Ok(Solver::Karp),
            "howard" => Ok(Solver::Howard),
            _ => Err(UnknownSolver),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownSolver;

impl fmt::Display for UnknownSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "solver must be `karp` or `howard`")
    }
}

impl core::error::Error for UnknownSolver {}

/// A minimum mean-weight cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct MmwcResult {
    /// Minimum cycle mean (per arc), recomputed from `cycle`.
    pub mu_star: f64,
    pub cycle: Cycle,
    /// `n * mu_star`, i.e. the optimum's `cbar`.
    pub scaled_mean: f64,
    pub length: usize,
}

impl MmwcResult {
    fn from_vertices(g: &WeightedDigraph, vs: &[u32]) -> Result<Self, SolverError> {
        let cycle = cycle_from_vertices(g, vs)?;
        let mu_star = cycle.mean();
        Ok(Self { mu_star, scaled_mean: g.n() as f64 * mu_star, length: cycle.len(), cycle })
    }
}

/// Run `solve_component` on every cyclic strong component and keep the best.
fn best_over_components<F>(g: &WeightedDigraph, mut solve_component: F) -> Result<MmwcResult, SolverError>
where
    F: FnMut(&[u32], &[u32], u32) -> Result<Vec<u32>, SolverError>,
{
    let comps = strong_components(g);
    let mut best: Option<(f64, Vec<u32>)> = None;
    for (id, members) in comps.cyclic() {
        let vs = solve_component(members, &comps.of, id as u32)?;
        let mean = walk_mean(g, &vs);
        if best.as_ref().is_none_or(|(m, _)| mean < *m) {
            best = Some((mean, vs));
        }
    }
    let (_, vs) = best.ok_or(SolverError::NoCycle)?;
    MmwcResult::from_vertices(g, &vs)
}

/// Mean weight of the closed walk through `vs`; arcs are assumed present.
fn walk_mean(g: &WeightedDigraph, vs: &[u32]) -> f64 {
    let k = vs.len();
    let total = compensated_sum(
        (0..k).map(|i| g.weight(vs[i] as usize, vs[(i + 1) % k] as usize).unwrap_or(f64::INFINITY)),
    );
    total / k as f64
}

/// Generate a directed mean-field instance and solve it.
pub fn solve_mean_field(n: usize, seed: u64, solver: Solver) -> Result<MmwcResult, SolverError> {
    let g = generate(&InstanceSpec { n, directed: true, seed }).map_err(|_| SolverError::NoCycle)?;
    solver.solve(&g)
}
