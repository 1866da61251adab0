//! Random k-SAT instances with 0, 1, or 2 hidden satisfying assignments.
//!
//! The crate is organised bottom-up:
//!
//! - [`formula`] and [`dimacs`]: CNF formulas, assignments, evaluation, DIMACS I/O.
//! - [`generator`]: seeded sampling of 0-, 1- and 2-hidden instances.
//! - [`moment`]: first-moment landscapes `f`, `g` and the symmetric-dominance threshold.
//! - [`ode`]: the mean-field differential equations for Unit Clause.
//! - [`uc`]: Unit Clause on concrete formulas, with density traces.
//! - [`solvers`]: WalkSAT and a myopic DPLL with work counters.
//! - [`bench`]: the experiment drivers behind the command-line tool.

pub mod bench;
pub mod dimacs;
mod error;
pub mod formula;
pub mod generator;
pub mod moment;
pub mod ode;
mod residual;
pub mod rng;
pub mod solvers;
pub mod stats;
pub mod uc;

pub use error::{Error, Result};
pub use formula::{Assignment, Clause, Formula, Literal};
pub use generator::{GeneratorSpec, HiddenInstance, HiddenMode};
