//! DIMACS CNF reading and writing, plus the `.sol` sidecar format.
//!
//! Hidden assignments never appear as clauses. They are either emitted as
//! `c hidden <bits>` comment lines or written to a sidecar file holding one
//! line of `n` characters over `{0,1}` per assignment.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Assignment, Clause, Formula, GenerationMeta, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct DimacsError {
    pub line: usize,
    pub kind: DimacsErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsErrorKind {
    #[error("missing or malformed `p cnf <vars> <clauses>` header")]
    BadHeader,
    #[error("clause data before the header")]
    MissingHeader,
    #[error("unparsable token `{0}`")]
    BadToken(String),
    #[error("literal {lit} out of range for {n} variables")]
    OutOfRange { lit: i64, n: usize },
    #[error("variable {0} repeated within a clause")]
    RepeatedVariable(usize),
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
    #[error("hidden assignment has length {found}, expected {expected}")]
    HiddenLength { found: usize, expected: usize },
    #[error("hidden assignment must be a string over {{0,1}}")]
    HiddenSyntax,
}

/// Strict parsing rejects repeated variables, clause-count mismatches and
/// unterminated clauses. Lenient parsing accepts them (the formula is then
/// flagged non-canonical when variables repeat).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

pub fn write_dimacs(f: &Formula, reveal_hidden: bool) -> String {
    let mut out = String::with_capacity(16 + f.num_clauses() * 4 * (f.width() + 1));
    if reveal_hidden {
        for h in f.hidden() {
            let _ = writeln!(out, "c hidden {}", h.to_bits());
        }
    }
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        for l in c.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str, mode: ParseMode) -> Result<Formula, DimacsError> {
    let err = |line: usize, kind| DimacsError { line, kind };
    let mut header: Option<(usize, usize)> = None;
    let mut hidden_lines: Vec<(usize, String)> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                return Err(err(lineno, DimacsErrorKind::BadToken(line.to_string())));
            }
            let mut words = rest.split_whitespace();
            if words.next() == Some("hidden") {
                let bits = words.next().unwrap_or("").to_string();
                hidden_lines.push((lineno, bits));
            }
            continue;
        }
        if line.starts_with('%') && mode == ParseMode::Lenient {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(err(lineno, DimacsErrorKind::BadHeader));
            }
            let n = parts[2].parse().map_err(|_| err(lineno, DimacsErrorKind::BadHeader))?;
            let m = parts[3].parse().map_err(|_| err(lineno, DimacsErrorKind::BadHeader))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(err(lineno, DimacsErrorKind::MissingHeader));
        };
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| err(lineno, DimacsErrorKind::BadToken(tok.to_string())))?;
            if v == 0 {
                let clause = Clause::new(std::mem::take(&mut current));
                if mode == ParseMode::Strict && !clause.has_distinct_variables() {
                    let var = first_repeat(&clause);
                    return Err(err(lineno, DimacsErrorKind::RepeatedVariable(var)));
                }
                clauses.push(clause);
            } else {
                if v.unsigned_abs() as usize > n {
                    return Err(err(lineno, DimacsErrorKind::OutOfRange { lit: v, n }));
                }
                current.push(Literal::from_dimacs(v));
            }
        }
    }

    let Some((n, m)) = header else {
        return Err(err(last_line.max(1), DimacsErrorKind::BadHeader));
    };
    if !current.is_empty() {
        if mode == ParseMode::Strict {
            return Err(err(last_line, DimacsErrorKind::Unterminated));
        }
        clauses.push(Clause::new(std::mem::take(&mut current)));
    }
    if mode == ParseMode::Strict && clauses.len() != m {
        return Err(err(
            last_line,
            DimacsErrorKind::ClauseCount {
                declared: m,
                found: clauses.len(),
            },
        ));
    }

    let mut hidden = Vec::with_capacity(hidden_lines.len());
    for (lineno, bits) in hidden_lines {
        let a = Assignment::from_bits(&bits).ok_or(err(lineno, DimacsErrorKind::HiddenSyntax))?;
        if a.len() != n {
            return Err(err(
                lineno,
                DimacsErrorKind::HiddenLength {
                    found: a.len(),
                    expected: n,
                },
            ));
        }
        hidden.push(a);
    }

    let k = clauses.iter().map(Clause::len).max().unwrap_or(0);
    // Range was checked token by token, so construction cannot fail.
    let mut formula = Formula::new(n, k, clauses).expect("literals were range-checked");
    if !hidden.is_empty() {
        formula = formula.with_meta(GenerationMeta {
            hidden,
            ..GenerationMeta::default()
        });
    }
    Ok(formula)
}

fn first_repeat(c: &Clause) -> usize {
    let lits = c.literals();
    for (i, a) in lits.iter().enumerate() {
        if lits[..i].iter().any(|b| b.var() == a.var()) {
            return a.var();
        }
    }
    0
}

/// One line per assignment, variable 1 first.
pub fn write_sidecar(hidden: &[Assignment]) -> String {
    let mut out = String::new();
    for h in hidden {
        out.push_str(&h.to_bits());
        out.push('\n');
    }
    out
}

pub fn parse_sidecar(text: &str, n: usize) -> Result<Vec<Assignment>, DimacsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let a = Assignment::from_bits(line).ok_or(DimacsError {
            line: i + 1,
            kind: DimacsErrorKind::HiddenSyntax,
        })?;
        if a.len() != n {
            return Err(DimacsError {
                line: i + 1,
                kind: DimacsErrorKind::HiddenLength {
                    found: a.len(),
                    expected: n,
                },
            });
        }
        out.push(a);
    }
    Ok(out)
}
