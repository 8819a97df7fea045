//! Decomposition solver for large binary quadratic programs.
//!
//! The program's interaction graph is partitioned once; each iteration then
//! solves every part in parallel with the variables of the other parts frozen
//! into local fields, re-assembles the global assignment and polishes it with
//! a monotone sweep. See [`orchestrator::split_solve`].

pub mod cli;
pub mod decomposition;
pub mod error;
pub mod exact;
pub mod instances;
pub mod metrics;
pub mod orchestrator;
pub mod partition;
pub mod qp;
pub mod report;
pub mod subsolvers;
pub mod sweep;

pub use error::{Error, Result};
pub use orchestrator::{split_solve, PartitionerKind, SplitConfig, SweepKind};
pub use partition::Partition;
pub use qp::{Assignment, Constraint, ConstraintKind, QuadraticProgram};
pub use report::{SolveReport, Termination};
