//! A small exact solver for 0-1 integer linear programs.
//!
//! [`BinaryProgram`] is the model representation, [`solve`] runs a depth-first
//! branch and bound with constraint propagation, and [`lp_format`] exports
//! programs for external MILP solvers and re-imports their solutions.

pub mod lp_format;
mod program;
mod search;

pub use program::{BinaryProgram, Comparator, Constraint, SolverError, Verification};
pub use search::{solve, Budget, SolveOptions, SolveResult, SolveStatus, TieBreak};
