//! Sampling of random k-SAT formulas with 0, 1 or 2 hidden assignments.
//!
//! A clause is drawn as a uniform k-subset of variables plus a sign pattern.
//! Patterns are expressed relative to the hidden assignment `A`: bit `i` set
//! means literal `i` agrees with `A`. A clause is violated by `A` exactly when
//! no literal agrees with it, and violated by the complement of `A` exactly
//! when every literal agrees. The admissible patterns are therefore contiguous
//! ranges of integers and are sampled directly:
//!
//! | mode | admissible patterns |
//! |------|---------------------|
//! | zero | `0 .. 2^k`          |
//! | one  | `1 .. 2^k`          |
//! | two  | `1 .. 2^k - 1`      |

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Clause, Formula, GenerationMeta, Literal};
use crate::rng::{below, stream_rng};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HiddenMode {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl HiddenMode {
    pub const ALL: [HiddenMode; 3] = [HiddenMode::Zero, HiddenMode::One, HiddenMode::Two];

    pub fn hidden_count(self) -> usize {
        match self {
            HiddenMode::Zero => 0,
            HiddenMode::One => 1,
            HiddenMode::Two => 2,
        }
    }

    pub fn from_count(h: usize) -> Option<HiddenMode> {
        match h {
            0 => Some(HiddenMode::Zero),
            1 => Some(HiddenMode::One),
            2 => Some(HiddenMode::Two),
            _ => None,
        }
    }
}

impl fmt::Display for HiddenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hidden_count())
    }
}

impl FromStr for HiddenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<HiddenMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "zero" => Ok(HiddenMode::Zero),
            "1" | "one" => Ok(HiddenMode::One),
            "2" | "two" => Ok(HiddenMode::Two),
            other => Err(Error::Config(format!("unknown hidden mode `{other}` (expected 0, 1 or 2)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub mode: HiddenMode,
    pub seed: u64,
}

impl GeneratorSpec {
    /// `m = round(r * n)`.
    pub fn with_density(n: usize, k: usize, r: f64, mode: HiddenMode, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            n,
            k,
            m: (r * n as f64).round() as usize,
            mode,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Domain(format!("clause width must be at least 2, got {}", self.k)));
        }
        if self.k > 62 {
            return Err(Error::Domain(format!("clause width {} exceeds the supported maximum of 62", self.k)));
        }
        if self.k > self.n {
            return Err(Error::Domain(format!("clause width {} exceeds variable count {}", self.k, self.n)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenInstance {
    pub formula: Formula,
    pub hidden: Vec<Assignment>,
    pub spec: GeneratorSpec,
}

/// Number of sign patterns a clause may take: `2^k`, `2^k - 1` or `2^k - 2`.
pub fn admissible_pattern_count(k: usize, mode: HiddenMode) -> Result<u64> {
    if k == 0 || k > 63 {
        return Err(Error::Domain(format!("clause width {k} outside 1..=63")));
    }
    if mode == HiddenMode::Two && k < 2 {
        return Err(Error::Domain(
            "a 1-clause is violated by either A or its complement".to_string(),
        ));
    }
    let total = 1u64 << k;
    Ok(total - mode.hidden_count() as u64)
}

/// Whether `c` could have been produced relative to `a` under `mode`.
pub fn clause_admissible(c: &Clause, a: &Assignment, mode: HiddenMode) -> bool {
    match mode {
        HiddenMode::Zero => true,
        HiddenMode::One => c.is_satisfied_by(a),
        HiddenMode::Two => {
            let agree = c.literals().iter().filter(|&&l| a.satisfies(l)).count();
            agree >= 1 && agree < c.len()
        }
    }
}

/// Range `lo..hi` of admissible agreement patterns for clause width `k`.
pub(crate) fn pattern_range(k: usize, mode: HiddenMode) -> (u64, u64) {
    let total = 1u64 << k;
    match mode {
        HiddenMode::Zero => (0, total),
        HiddenMode::One => (1, total),
        HiddenMode::Two => (1, total - 1),
    }
}

// Stream 0 holds the hidden assignment; clause i uses stream i + 1.
fn draw_hidden(spec: &GeneratorSpec) -> Assignment {
    let mut rng = stream_rng(spec.seed, 0);
    Assignment::new((0..spec.n).map(|_| rng.next_u32() & 1 == 1).collect())
}

fn draw_clause(spec: &GeneratorSpec, reference: &Assignment, i: usize) -> Clause {
    let mut rng = stream_rng(spec.seed, i as u64 + 1);
    let mut vars = index::sample(&mut rng, spec.n, spec.k).into_vec();
    vars.sort_unstable();
    let (lo, hi) = pattern_range(spec.k, spec.mode);
    let pattern = lo + below(&mut rng, (hi - lo) as usize) as u64;
    let lits = vars
        .iter()
        .enumerate()
        .map(|(bit, &v)| {
            let agrees = pattern >> bit & 1 == 1;
            Literal::new(v + 1, reference.value(v) == agrees)
        })
        .collect();
    Clause::new(lits)
}

fn assemble(spec: GeneratorSpec, reference: Assignment, clauses: Vec<Clause>) -> HiddenInstance {
    let hidden = match spec.mode {
        HiddenMode::Zero => Vec::new(),
        HiddenMode::One => vec![reference],
        HiddenMode::Two => {
            let complement = reference.complement();
            vec![reference, complement]
        }
    };
    let formula = Formula::new(spec.n, spec.k, clauses)
        .expect("generated literals are in range")
        .with_meta(GenerationMeta {
            mode: Some(spec.mode),
            seed: Some(spec.seed),
            hidden: hidden.clone(),
        });
    HiddenInstance { formula, hidden, spec }
}

fn reference_for(spec: &GeneratorSpec) -> Assignment {
    match spec.mode {
        // Patterns are then plain sign patterns (bit set = positive literal).
        HiddenMode::Zero => Assignment::all(spec.n, true),
        _ => draw_hidden(spec),
    }
}

/// Draws an instance. The result is a pure function of `spec`.
pub fn sample_instance(spec: &GeneratorSpec) -> Result<HiddenInstance> {
    spec.validate()?;
    let reference = reference_for(spec);
    let clauses = (0..spec.m).map(|i| draw_clause(spec, &reference, i)).collect();
    Ok(assemble(*spec, reference, clauses))
}

/// Same as [`sample_instance`] with clauses drawn on the rayon pool.
pub fn sample_instance_parallel(spec: &GeneratorSpec) -> Result<HiddenInstance> {
    spec.validate()?;
    let reference = reference_for(spec);
    let clauses = (0..spec.m)
        .into_par_iter()
        .map(|i| draw_clause(spec, &reference, i))
        .collect();
    Ok(assemble(*spec, reference, clauses))
}

/// Expected 3-clause densities `s[j]`, `j` = number of literals agreeing with
/// the hidden assignment (positive literals in the all-ones gauge).
pub fn initial_density_profile(k: usize, r: f64, mode: HiddenMode) -> Result<Vec<f64>> {
    let patterns = admissible_pattern_count(k, mode)? as f64;
    let (lo, hi) = pattern_range(k, mode);
    let mut profile = vec![0.0; k + 1];
    for (j, s) in profile.iter_mut().enumerate() {
        let forbidden = (j == 0 && lo > 0) || (j == k && hi < 1u64 << k);
        if !forbidden {
            *s = r * binomial(k, j) / patterns;
        }
    }
    Ok(profile)
}

/// The k = 3 profile as a fixed array.
pub fn initial_density_profile3(r: f64, mode: HiddenMode) -> [f64; 4] {
    let p = initial_density_profile(3, r, mode).expect("k = 3 is valid for every mode");
    [p[0], p[1], p[2], p[3]]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
