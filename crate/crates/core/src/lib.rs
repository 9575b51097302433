//! Minimum mean-weight cycles in the mean-field distance model, together with
//! the random-walk and spectral machinery used to study their supercritical
//! regime.
//!
//! The crate is `no_std` compatible (it needs `alloc`). File formats, the CLI
//! and the parallel experiment driver live in the `mmwc-lab` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cycle_stats;
pub mod graph;
pub mod mean_field;
pub mod mmwc;
pub mod quad;
pub mod rng;
pub mod scc;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod sum;
pub mod walk;

pub use graph::{Arc, Cycle, GraphError, WeightedDigraph};
pub use mean_field::{generate, InstanceSpec};
pub use mmwc::{howard_mmc, karp_mmc, solve_mean_field, MmwcResult, Solver, SolverError};
pub use spectral::{principal_lambda, SpectralError, SpectralSolution};
pub use walk::{McEstimate, WalkPath};
