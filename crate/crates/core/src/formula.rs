//! CNF formulas, truth assignments, evaluation and a brute-force model counter.

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::generator::HiddenMode;
use crate::{Error, Result};

/// A literal packed as `2 * (var - 1) + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(u32);

impl Literal {
    /// `var` is 1-based.
    pub fn new(var: usize, positive: bool) -> Literal {
        assert!(var >= 1, "variables are 1-based");
        Literal(((var as u32 - 1) << 1) | u32::from(!positive))
    }

    pub fn from_dimacs(value: i64) -> Literal {
        assert!(value != 0, "0 is the DIMACS clause terminator");
        Literal::new(value.unsigned_abs() as usize, value > 0)
    }

    pub fn from_code(code: u32) -> Literal {
        Literal(code)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// 1-based variable.
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize + 1
    }

    /// 0-based variable index.
    pub fn index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> u32 {
        self.0
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(lits: Vec<Literal>) -> Clause {
        Clause { lits }
    }

    pub fn from_dimacs(values: &[i64]) -> Clause {
        Clause::new(values.iter().map(|&v| Literal::from_dimacs(v)).collect())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// No variable occurs twice.
    pub fn has_distinct_variables(&self) -> bool {
        let mut vars: Vec<usize> = self.lits.iter().map(|l| l.var()).collect();
        vars.sort_unstable();
        vars.windows(2).all(|w| w[0] != w[1])
    }

    /// Panics if a literal's variable lies outside `a`.
    pub fn is_satisfied_by(&self, a: &Assignment) -> bool {
        self.lits.iter().any(|&l| a.satisfies(l))
    }

    pub fn max_var(&self) -> usize {
        self.lits.iter().map(|l| l.var()).max().unwrap_or(0)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            if l.is_positive() {
                write!(f, "x{}", l.var())?;
            } else {
                write!(f, "¬x{}", l.var())?;
            }
        }
        write!(f, ")")
    }
}

/// Length-n truth vector. Index `i` holds variable `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment(values)
    }

    pub fn all(n: usize, value: bool) -> Assignment {
        Assignment(vec![value; n])
    }

    /// Parses a string over `{0,1}` (variable 1 first).
    pub fn from_bits(bits: &str) -> Option<Assignment> {
        bits.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(Assignment)
    }

    pub fn to_bits(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    /// Value of the 0-based variable `index`.
    pub fn value(&self, index: usize) -> bool {
        self.0[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.0[index] = value;
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] = !self.0[index];
    }

    pub fn satisfies(&self, lit: Literal) -> bool {
        self.0[lit.index()] == lit.is_positive()
    }

    pub fn complement(&self) -> Assignment {
        Assignment(self.0.iter().map(|b| !b).collect())
    }

    /// Componentwise XOR: flips every position where `mask` is true.
    pub fn xor(&self, mask: &Assignment) -> Assignment {
        assert_eq!(self.len(), mask.len(), "assignment length mismatch");
        Assignment(self.0.iter().zip(&mask.0).map(|(a, b)| a ^ b).collect())
    }
}

/// Fraction of positions on which `a` and `b` agree.
pub fn overlap_fraction(a: &Assignment, b: &Assignment) -> f64 {
    assert_eq!(a.len(), b.len(), "assignment length mismatch");
    if a.is_empty() {
        return 1.0;
    }
    let agree = a.0.iter().zip(&b.0).filter(|(x, y)| x == y).count();
    agree as f64 / a.len() as f64
}

/// How a formula came to be. Parsed formulas carry only the hidden list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenerationMeta {
    pub mode: Option<HiddenMode>,
    pub seed: Option<u64>,
    pub hidden: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    n: usize,
    k: usize,
    clauses: Vec<Clause>,
    canonical: bool,
    pub meta: Option<GenerationMeta>,
}

/// Summary of evaluating a formula under one assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied_count: usize,
    pub is_model: bool,
}

impl Formula {
    /// Builds a formula over `n` variables with nominal clause width `k`.
    /// Clauses with repeated variables are accepted but mark the formula as
    /// non-canonical.
    pub fn new(n: usize, k: usize, clauses: Vec<Clause>) -> Result<Formula> {
        let mut canonical = true;
        for c in &clauses {
            for l in c.literals() {
                if l.var() > n {
                    return Err(Error::VariableOutOfRange { var: l.var(), n });
                }
            }
            canonical &= c.has_distinct_variables();
        }
        Ok(Formula {
            n,
            k,
            clauses,
            canonical,
            meta: None,
        })
    }

    pub fn empty(n: usize, k: usize) -> Formula {
        Formula {
            n,
            k,
            clauses: Vec::new(),
            canonical: true,
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: GenerationMeta) -> Formula {
        self.meta = Some(meta);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause density m/n.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.clauses.len() as f64 / self.n as f64
        }
    }

    /// Every clause has pairwise distinct variables.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Every clause has exactly `width()` literals.
    pub fn is_uniform(&self) -> bool {
        self.clauses.iter().all(|c| c.len() == self.k)
    }

    pub fn hidden(&self) -> &[Assignment] {
        self.meta.as_ref().map(|m| m.hidden.as_slice()).unwrap_or(&[])
    }

    pub fn evaluate(&self, a: &Assignment) -> Evaluation {
        assert_eq!(a.len(), self.n, "assignment length must equal n");
        let satisfied_count = self.clauses.iter().filter(|c| c.is_satisfied_by(a)).count();
        Evaluation {
            satisfied_count,
            is_model: satisfied_count == self.clauses.len(),
        }
    }

    pub fn is_model(&self, a: &Assignment) -> bool {
        assert_eq!(a.len(), self.n, "assignment length must equal n");
        self.clauses.iter().all(|c| c.is_satisfied_by(a))
    }

    /// Flips the polarity of every literal on a variable where `mask` is true.
    /// Hidden assignments are flipped along with the clauses.
    pub fn gauge_flip(&self, mask: &Assignment) -> Formula {
        assert_eq!(mask.len(), self.n, "mask length must equal n");
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                Clause::new(
                    c.literals()
                        .iter()
                        .map(|&l| if mask.value(l.index()) { !l } else { l })
                        .collect(),
                )
            })
            .collect();
        let meta = self.meta.as_ref().map(|m| GenerationMeta {
            mode: m.mode,
            seed: m.seed,
            hidden: m.hidden.iter().map(|h| h.xor(mask)).collect(),
        });
        Formula {
            n: self.n,
            k: self.k,
            clauses,
            canonical: self.canonical,
            meta,
        }
    }

    /// Same clause list without metadata.
    pub fn structure_eq(&self, other: &Formula) -> bool {
        self.n == other.n && self.k == other.k && self.clauses == other.clauses
    }
}

/// Panics if the clause mentions a variable beyond the assignment.
pub fn evaluate_clause(clause: &Clause, a: &Assignment) -> bool {
    assert!(clause.max_var() <= a.len(), "clause variable {} out of range for {} values", clause.max_var(), a.len());
    clause.is_satisfied_by(a)
}

pub fn evaluate_formula(f: &Formula, a: &Assignment) -> Evaluation {
    f.evaluate(a)
}

pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Exact model count by enumerating all `2^n` assignments.
pub fn brute_force_count(f: &Formula) -> Result<u64> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    // Clause as (positive mask, negative mask): satisfied iff a & pos != 0 or !a & neg != 0.
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0u32, 0u32), |(p, q), l| {
                let bit = 1u32 << l.index();
                if l.is_positive() {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect();
    let count = (0u32..(1u32 << n))
        .filter(|&a| masks.iter().all(|&(p, q)| (a & p) != 0 || (!a & q) != 0))
        .count();
    Ok(count as u64)
}
