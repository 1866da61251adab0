//! WalkSAT as a literal random-or-greedy walk: pick a uniformly random
//! unsatisfied clause, then with probability `1 - greedy_probability` flip a
//! random variable of it, otherwise the one with the fewest breaks (ties
//! uniform). No freebie rule, no restarts.

use serde::{Deserialize, Serialize};

use super::{normalized_codes, SolveResult, SolveStatus};
use crate::formula::{Assignment, Formula};
use crate::rng::{below, bernoulli, coin, rng_from_seed, SatRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalksatInit {
    UniformRandom,
    /// Each bit of `target` is kept with probability `agreement`.
    Biased { target: Assignment, agreement: f64 },
    /// Start from this exact assignment.
    Fixed(Assignment),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalksatParams {
    pub max_flips: u64,
    pub greedy_probability: f64,
    pub init: WalksatInit,
    pub seed: u64,
    /// When set, every flip is checked against its make/break prediction and
    /// the full state is recomputed every this many flips. Panics on mismatch.
    #[serde(default)]
    pub audit_every: Option<u64>,
}

impl WalksatParams {
    pub fn new(max_flips: u64, init: WalksatInit, seed: u64) -> WalksatParams {
        WalksatParams {
            max_flips,
            greedy_probability: 0.5,
            init,
            seed,
            audit_every: None,
        }
    }
}

const NONE: u32 = u32::MAX;

struct State {
    lits: Vec<u32>,
    start: Vec<u32>,
    occ: Vec<u32>,
    occ_start: Vec<u32>,
    value: Vec<bool>,
    true_count: Vec<u32>,
    /// XOR of the variables with a true literal; the critical variable when
    /// exactly one literal is true.
    crit: Vec<u32>,
    breaks: Vec<u32>,
    unsat: Vec<u32>,
    unsat_pos: Vec<u32>,
}

impl State {
    fn new(clauses: Vec<Vec<u32>>, n: usize, value: Vec<bool>) -> State {
        let mut lits = Vec::new();
        let mut start = vec![0u32];
        for c in &clauses {
            lits.extend_from_slice(c);
            start.push(lits.len() as u32);
        }
        let mut occ_start = vec![0u32; 2 * n + 1];
        for &l in &lits {
            occ_start[l as usize + 1] += 1;
        }
        for i in 0..2 * n {
            occ_start[i + 1] += occ_start[i];
        }
        let mut fill = occ_start.clone();
        let mut occ = vec![0u32; lits.len()];
        for (c, cl) in clauses.iter().enumerate() {
            for &l in cl {
                occ[fill[l as usize] as usize] = c as u32;
                fill[l as usize] += 1;
            }
        }
        let m = clauses.len();
        let mut st = State {
            lits,
            start,
            occ,
            occ_start,
            value,
            true_count: vec![0; m],
            crit: vec![0; m],
            breaks: vec![0; n],
            unsat: Vec::new(),
            unsat_pos: vec![NONE; m],
        };
        st.rebuild();
        st
    }

    fn clause(&self, c: usize) -> &[u32] {
        &self.lits[self.start[c] as usize..self.start[c + 1] as usize]
    }

    fn lit_true(&self, code: u32) -> bool {
        self.value[(code >> 1) as usize] != (code & 1 == 1)
    }

    fn rebuild(&mut self) {
        self.breaks.iter_mut().for_each(|b| *b = 0);
        self.unsat.clear();
        for c in 0..self.true_count.len() {
            let (mut tc, mut crit) = (0, 0);
            for &l in self.clause(c) {
                if self.lit_true(l) {
                    tc += 1;
                    crit ^= l >> 1;
                }
            }
            self.true_count[c] = tc;
            self.crit[c] = crit;
            self.unsat_pos[c] = NONE;
            match tc {
                0 => {
                    self.unsat_pos[c] = self.unsat.len() as u32;
                    self.unsat.push(c as u32);
                }
                1 => self.breaks[crit as usize] += 1,
                _ => {}
            }
        }
    }

    fn snapshot(&self) -> (Vec<u32>, Vec<u32>, Vec<u32>, Vec<u32>) {
        let mut unsat = self.unsat.clone();
        unsat.sort_unstable();
        let crit = self
            .crit
            .iter()
            .zip(&self.true_count)
            .map(|(&c, &t)| if t == 1 { c } else { 0 })
            .collect();
        (self.true_count.clone(), crit, self.breaks.clone(), unsat)
    }

    fn makes(&self, v: usize) -> u32 {
        let code = 2 * v as u32 + self.value[v] as u32;
        (self.occ_start[code as usize]..self.occ_start[code as usize + 1])
            .filter(|&i| self.true_count[self.occ[i as usize] as usize] == 0)
            .count() as u32
    }

    fn flip(&mut self, v: usize) {
        let was_true = 2 * v as u32 + !self.value[v] as u32;
        let now_true = was_true ^ 1;
        self.value[v] = !self.value[v];
        let vu = v as u32;
        for i in self.occ_start[was_true as usize]..self.occ_start[was_true as usize + 1] {
            let c = self.occ[i as usize] as usize;
            self.true_count[c] -= 1;
            self.crit[c] ^= vu;
            match self.true_count[c] {
                0 => {
                    self.breaks[v] -= 1;
                    self.unsat_pos[c] = self.unsat.len() as u32;
                    self.unsat.push(c as u32);
                }
                1 => self.breaks[self.crit[c] as usize] += 1,
                _ => {}
            }
        }
        for i in self.occ_start[now_true as usize]..self.occ_start[now_true as usize + 1] {
            let c = self.occ[i as usize] as usize;
            let before = self.crit[c];
            self.true_count[c] += 1;
            self.crit[c] ^= vu;
            match self.true_count[c] {
                1 => {
                    self.breaks[v] += 1;
                    let pos = self.unsat_pos[c] as usize;
                    let last = self.unsat.pop().expect("clause was unsatisfied");
                    if last as usize != c {
                        self.unsat[pos] = last;
                        self.unsat_pos[last as usize] = pos as u32;
                    }
                    self.unsat_pos[c] = NONE;
                }
                2 => self.breaks[before as usize] -= 1,
                _ => {}
            }
        }
    }

    fn pick(&self, c: usize, greedy: bool, rng: &mut SatRng) -> usize {
        let cl = self.clause(c);
        if !greedy {
            return (cl[below(rng, cl.len())] >> 1) as usize;
        }
        let mut best = u32::MAX;
        let mut choice = 0;
        let mut ties = 0;
        for &l in cl {
            let v = (l >> 1) as usize;
            let b = self.breaks[v];
            if b < best {
                best = b;
                choice = v;
                ties = 1;
            } else if b == best {
                ties += 1;
                if below(rng, ties) == 0 {
                    choice = v;
                }
            }
        }
        choice
    }
}

fn initial(f: &Formula, init: &WalksatInit, rng: &mut SatRng) -> Assignment {
    let n = f.num_vars();
    let a = match init {
        WalksatInit::UniformRandom => Assignment::new((0..n).map(|_| coin(rng)).collect()),
        WalksatInit::Biased { target, agreement } => {
            assert!((0.0..=1.0).contains(agreement), "agreement must lie in [0, 1]");
            let mut a = target.clone();
            for i in 0..n {
                if bernoulli(rng, 1.0 - agreement) {
                    a.flip(i);
                }
            }
            a
        }
        WalksatInit::Fixed(a) => a.clone(),
    };
    assert_eq!(a.len(), n, "initial assignment has the wrong length");
    a
}

/// A formula with an empty clause can never be satisfied; it is reported as
/// budget-exhausted without walking.
pub fn walksat_solve(f: &Formula, p: &WalksatParams) -> SolveResult {
    let mut rng = rng_from_seed(p.seed);
    let start = initial(f, &p.init, &mut rng);
    let exhausted = |work| SolveResult {
        status: SolveStatus::BudgetExhausted,
        model: None,
        work,
        seed: p.seed,
    };
    if f.clauses().iter().any(|c| c.is_empty()) {
        return exhausted(0);
    }
    let clauses: Vec<Vec<u32>> = f.clauses().iter().filter_map(normalized_codes).collect();
    let mut st = State::new(clauses, f.num_vars(), start.values().to_vec());
    let mut flips = 0u64;
    while !st.unsat.is_empty() {
        if flips >= p.max_flips {
            return exhausted(flips);
        }
        let c = st.unsat[below(&mut rng, st.unsat.len())] as usize;
        let greedy = bernoulli(&mut rng, p.greedy_probability);
        let v = st.pick(c, greedy, &mut rng);
        if let Some(every) = p.audit_every {
            let expected = st.unsat.len() as i64 + st.breaks[v] as i64 - st.makes(v) as i64;
            st.flip(v);
            assert_eq!(st.unsat.len() as i64, expected, "make/break prediction violated at flip {}", flips + 1);
            if (flips + 1) % every.max(1) == 0 {
                let incremental = st.snapshot();
                st.rebuild();
                assert_eq!(incremental, st.snapshot(), "incremental state diverged at flip {}", flips + 1);
            }
        } else {
            st.flip(v);
        }
        flips += 1;
    }
    let model = Assignment::new(st.value);
    debug_assert!(f.is_model(&model));
    SolveResult {
        status: SolveStatus::Sat,
        model: Some(model),
        work: flips,
        seed: p.seed,
    }
}
