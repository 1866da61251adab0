//! Myopic DPLL: unit propagation and chronological backtracking only, with
//! one of three rules for the split variable and its first value.

use serde::{Deserialize, Serialize};

use super::{SolveResult, SolveStatus};
use crate::formula::{Formula, Literal};
use crate::residual::Residual;
use crate::rng::{below, rng_from_seed, SatRng};
use crate::uc;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchRule {
    /// Uniform unset variable, uniform first value. Its first descent is UC.
    RandomFirst,
    /// Uniform unset variable, false first.
    FixedFalseFirst,
    /// Most frequent variable in the residual clauses (ties uniform), first
    /// value by majority sign (ties false).
    MajorityFirst,
}

impl BranchRule {
    pub const ALL: [BranchRule; 3] = [BranchRule::RandomFirst, BranchRule::FixedFalseFirst, BranchRule::MajorityFirst];

    pub fn name(self) -> &'static str {
        match self {
            BranchRule::RandomFirst => "random_first",
            BranchRule::FixedFalseFirst => "fixed_false_first",
            BranchRule::MajorityFirst => "majority_first",
        }
    }
}

impl std::fmt::Display for BranchRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BranchRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BranchRule::ALL
            .into_iter()
            .find(|r| r.name() == s.replace('-', "_"))
            .ok_or_else(|| format!("unknown branch rule `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DpllParams {
    pub branch_rule: BranchRule,
    /// Maximum number of splits; `u64::MAX` for a complete search.
    pub branching_budget: u64,
    pub seed: u64,
}

fn choose(res: &Residual, rule: BranchRule, rng: &mut SatRng) -> Literal {
    match rule {
        BranchRule::RandomFirst => res.random_literal(rng),
        BranchRule::FixedFalseFirst => Literal::new(res.random_unset(rng) + 1, false),
        BranchRule::MajorityFirst => {
            let mut best = 0;
            let mut choice = 0;
            let mut ties = 0;
            for &v in res.unset_vars() {
                let total = res.occurrences(2 * v) + res.occurrences(2 * v + 1);
                if ties == 0 || total > best {
                    best = total;
                    choice = v;
                    ties = 1;
                } else if total == best {
                    ties += 1;
                    if below(rng, ties) == 0 {
                        choice = v;
                    }
                }
            }
            let positive = res.occurrences(2 * choice) > res.occurrences(2 * choice + 1);
            Literal::new(choice as usize + 1, positive)
        }
    }
}

/// How the first descent ended, with the literals it set in order.
#[derive(Debug)]
struct Descent {
    log: Vec<Literal>,
    branches: u64,
    conflict: bool,
}

struct Frame {
    mark: usize,
    lit: Literal,
    flipped: bool,
}

/// With `record`, the search stops at the end of its first descent.
fn solve(f: &Formula, p: &DpllParams, record: bool) -> (SolveResult, Option<Descent>) {
    let mut rng = rng_from_seed(p.seed);
    let mut res = Residual::new(f, None, true);
    if record {
        res.enable_log();
    }
    let mut descent: Option<Descent> = None;
    let mut branches = 0u64;
    let finish = |status, model, work| SolveResult {
        status,
        model,
        work,
        seed: p.seed,
    };

    let mut ok = !res.has_conflict() && res.propagate(&mut rng);
    let mut stack: Vec<Frame> = Vec::new();
    loop {
        if !ok {
            if record && descent.is_none() {
                descent = Some(Descent {
                    log: res.take_log(),
                    branches,
                    conflict: true,
                });
                return (finish(SolveStatus::BudgetExhausted, None, branches), descent);
            }
            loop {
                let Some(top) = stack.last_mut() else {
                    return (finish(SolveStatus::Unsat, None, branches), descent);
                };
                res.undo_to(top.mark);
                if !top.flipped {
                    top.flipped = true;
                    let lit = !top.lit;
                    ok = res.assign(lit) && res.propagate(&mut rng);
                    break;
                }
                stack.pop();
            }
            continue;
        }
        if res.alive() == 0 {
            if record && descent.is_none() {
                descent = Some(Descent {
                    log: res.take_log(),
                    branches,
                    conflict: false,
                });
            }
            let model = res.model();
            debug_assert!(f.is_model(&model));
            return (finish(SolveStatus::Sat, Some(model), branches), descent);
        }
        if branches >= p.branching_budget {
            return (finish(SolveStatus::BudgetExhausted, None, branches), descent);
        }
        branches += 1;
        let lit = choose(&res, p.branch_rule, &mut rng);
        stack.push(Frame {
            mark: res.trail_len(),
            lit,
            flipped: false,
        });
        ok = res.assign(lit) && res.propagate(&mut rng);
    }
}

/// Unset variables of a satisfying residual are reported false.
pub fn dpll_solve(f: &Formula, p: &DpllParams) -> SolveResult {
    solve(f, p, false).0
}

/// Checks that DPLL with [`BranchRule::RandomFirst`] walks exactly UC's path
/// until its first conflict or until no clause is left. UC keeps making free
/// choices after that point, so on success DPLL's path must be a prefix.
pub fn first_descent_equals_uc(f: &Formula, seed: u64) -> Result<bool> {
    let ucr = uc::run(f, None, seed, None, true)?;
    let p = DpllParams {
        branch_rule: BranchRule::RandomFirst,
        branching_budget: u64::MAX,
        seed,
    };
    let (_, descent) = solve(f, &p, true);
    let d = descent.expect("recording stops at the end of the first descent");
    let out = &ucr.outcome;
    Ok(if d.conflict {
        !out.success && ucr.log == d.log && out.failure_step == Some(d.branches as usize)
    } else {
        out.success && ucr.log.starts_with(&d.log) && d.branches as usize <= out.steps
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{brute_force_count, Clause};
    use crate::generator::{sample_instance, GeneratorSpec, HiddenMode};

    fn params(rule: BranchRule, seed: u64) -> DpllParams {
        DpllParams {
            branch_rule: rule,
            branching_budget: u64::MAX,
            seed,
        }
    }

    #[test]
    fn trivial_cases() {
        let r = dpll_solve(&Formula::empty(4, 3), &params(BranchRule::RandomFirst, 0));
        assert_eq!((r.status, r.work), (SolveStatus::Sat, 0));

        let f = Formula::new(1, 1, vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])]).unwrap();
        let r = dpll_solve(&f, &DpllParams { branching_budget: 0, ..params(BranchRule::MajorityFirst, 0) });
        assert_eq!((r.status, r.work), (SolveStatus::Unsat, 0));

        let cl = [[1, 2, 2], [-1, 2, 2], [1, -2, -2], [-1, -2, -2]];
        let f = Formula::new(2, 3, cl.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap();
        for rule in BranchRule::ALL {
            let r = dpll_solve(&f, &params(rule, 5));
            assert_eq!(r.status, SolveStatus::Unsat);
            assert!(r.work >= 1);
        }
    }

    #[test]
    fn budget_is_respected() {
        let inst = sample_instance(&GeneratorSpec::with_density(60, 3, 5.0, HiddenMode::Zero, 1)).unwrap();
        let r = dpll_solve(&inst.formula, &DpllParams { branching_budget: 3, ..params(BranchRule::RandomFirst, 0) });
        if r.status == SolveStatus::BudgetExhausted {
            assert_eq!(r.work, 3);
        }
    }

    #[test]
    fn complete_on_small_instances() {
        for seed in 0..60 {
            let mode = HiddenMode::ALL[seed as usize % 3];
            let inst = sample_instance(&GeneratorSpec::with_density(12, 3, 5.0, mode, seed)).unwrap();
            let sat = brute_force_count(&inst.formula).unwrap() > 0;
            for rule in BranchRule::ALL {
                let r = dpll_solve(&inst.formula, &params(rule, seed));
                assert_eq!(r.status == SolveStatus::Sat, sat, "seed {seed} rule {rule}");
                if let Some(m) = &r.model {
                    assert!(inst.formula.is_model(m));
                }
            }
        }
    }

    #[test]
    fn descent_replays_uc() {
        for seed in 0..30 {
            let r = [1.5, 3.0, 4.5][seed as usize % 3];
            let inst = sample_instance(&GeneratorSpec::with_density(200, 3, r, HiddenMode::Zero, seed)).unwrap();
            assert!(first_descent_equals_uc(&inst.formula, seed + 100).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn parses_rule_names() {
        assert_eq!("majority-first".parse::<BranchRule>().unwrap(), BranchRule::MajorityFirst);
        assert!("nope".parse::<BranchRule>().is_err());
    }
}
