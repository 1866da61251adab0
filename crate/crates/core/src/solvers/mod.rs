//! WalkSAT and a myopic DPLL, both reporting a work counter: flips for
//! WalkSAT, two-way splits for DPLL.

mod dpll;
mod walksat;

use serde::{Deserialize, Serialize};

use crate::formula::Assignment;

pub use dpll::{dpll_solve, first_descent_equals_uc, BranchRule, DpllParams};
pub use walksat::{walksat_solve, WalksatInit, WalksatParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Sat,
    Unsat,
    BudgetExhausted,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::BudgetExhausted => "budget_exhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub model: Option<Assignment>,
    pub work: u64,
    pub seed: u64,
}

/// Literal codes of a clause with repeats merged, or `None` for a tautology.
pub(crate) fn normalized_codes(c: &crate::Clause) -> Option<Vec<u32>> {
    let mut codes: Vec<u32> = c.literals().iter().map(|l| l.code()).collect();
    codes.sort_unstable();
    codes.dedup();
    if codes.windows(2).any(|w| w[0] ^ 1 == w[1]) {
        None
    } else {
        Some(codes)
    }
}
