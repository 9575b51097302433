//! File formats, the parallel experiment driver and the `mmwc` command-line
//! tool built on `mmwc-core`.

pub mod config;
pub mod edge_list;
pub mod moments;
pub mod parallel;
pub mod phase;
pub mod table;
pub mod walk_suite;

pub use config::{ExperimentConfig, SolverChoice};
pub use edge_list::{read_edge_list, write_edge_list, EdgeListError};
pub use moments::{run_moment_check, MomentReport, MomentRow};
pub use parallel::{run_chunks_parallel, thread_pool};
pub use phase::{run_diagnostics, run_phase, ExperimentRecord, PhaseOutcome, PhaseSummary};
pub use walk_suite::{run_walk_suite, WalkSuiteConfig, WalkSuiteReport};
