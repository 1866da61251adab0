//! Residual formula under a partial assignment, with unit propagation and an
//! undo trail. Unit Clause and DPLL both descend through this structure so
//! that, given the same random stream, DPLL's first descent is exactly a UC run.

use crate::formula::{Assignment, Formula, Literal};
use crate::rng::{below, coin, SatRng};
use crate::solvers::normalized_codes;

const NONE: u32 = u32::MAX;
const UNSET: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

#[derive(Clone, Copy, Debug)]
enum Change {
    Assign(u32),
    Satisfied(u32),
    Shortened { clause: u32, agreeing: bool },
}

pub(crate) struct Residual {
    n: usize,
    lits: Vec<u32>,
    start: Vec<u32>,
    occ: Vec<u32>,
    occ_start: Vec<u32>,
    agree: Vec<bool>,
    value: Vec<u8>,
    len: Vec<u32>,
    class: Vec<u32>,
    satisfied: Vec<bool>,
    alive: usize,
    units: Vec<u32>,
    unit_pos: Vec<u32>,
    unset: Vec<u32>,
    unset_pos: Vec<u32>,
    occ_count: Vec<u32>,
    counts: [[usize; 4]; 4],
    trail: Option<Vec<Change>>,
    log: Option<Vec<Literal>>,
    conflict: bool,
    peak_units: usize,
}

impl Residual {
    /// `reference` fixes the agreement classes used in the density counts
    /// (positive literals when absent). Repeated literals are merged and
    /// tautologies dropped.
    pub(crate) fn new(f: &Formula, reference: Option<&Assignment>, with_trail: bool) -> Residual {
        let n = f.num_vars();
        let mut lits = Vec::with_capacity(f.num_clauses() * f.width().max(1));
        let mut start = Vec::with_capacity(f.num_clauses() + 1);
        start.push(0u32);
        for c in f.clauses() {
            let Some(codes) = normalized_codes(c) else {
                continue;
            };
            lits.extend_from_slice(&codes);
            start.push(lits.len() as u32);
        }
        let m = start.len() - 1;

        let mut occ_count = vec![0u32; 2 * n];
        for &l in &lits {
            occ_count[l as usize] += 1;
        }
        let mut occ_start = vec![0u32; 2 * n + 1];
        for l in 0..2 * n {
            occ_start[l + 1] = occ_start[l] + occ_count[l];
        }
        let mut fill = occ_start.clone();
        let mut occ = vec![0u32; lits.len()];
        for c in 0..m {
            for &l in &lits[start[c] as usize..start[c + 1] as usize] {
                occ[fill[l as usize] as usize] = c as u32;
                fill[l as usize] += 1;
            }
        }

        let agree: Vec<bool> = (0..2 * n as u32)
            .map(|code| {
                let lit = Literal::from_code(code);
                match reference {
                    Some(a) => a.satisfies(lit),
                    None => lit.is_positive(),
                }
            })
            .collect();

        let mut len = vec![0u32; m];
        let mut class = vec![0u32; m];
        let mut counts = [[0usize; 4]; 4];
        let mut units = Vec::new();
        let mut unit_pos = vec![NONE; m];
        let mut conflict = false;
        for c in 0..m {
            let cl = &lits[start[c] as usize..start[c + 1] as usize];
            len[c] = cl.len() as u32;
            class[c] = cl.iter().filter(|&&l| agree[l as usize]).count() as u32;
            if len[c] <= 3 {
                counts[len[c] as usize][class[c] as usize] += 1;
            }
            match len[c] {
                0 => conflict = true,
                1 => {
                    unit_pos[c] = units.len() as u32;
                    units.push(c as u32);
                }
                _ => {}
            }
        }

        Residual {
            n,
            lits,
            start,
            occ,
            occ_start,
            agree,
            value: vec![UNSET; n],
            len,
            class,
            satisfied: vec![false; m],
            alive: m,
            peak_units: units.len(),
            units,
            unit_pos,
            unset: (0..n as u32).collect(),
            unset_pos: (0..n as u32).collect(),
            occ_count,
            counts,
            trail: with_trail.then(Vec::new),
            log: None,
            conflict,
        }
    }

    pub(crate) fn enable_log(&mut self) {
        self.log = Some(Vec::new());
    }

    pub(crate) fn take_log(&mut self) -> Vec<Literal> {
        self.log.take().unwrap_or_default()
    }

    pub(crate) fn has_conflict(&self) -> bool {
        self.conflict
    }

    pub(crate) fn alive(&self) -> usize {
        self.alive
    }

    pub(crate) fn num_unset(&self) -> usize {
        self.unset.len()
    }

    pub(crate) fn variables_set(&self) -> usize {
        self.n - self.unset.len()
    }

    pub(crate) fn unset_vars(&self) -> &[u32] {
        &self.unset
    }

    #[cfg(test)]
    pub(crate) fn pending_units(&self) -> usize {
        self.units.len()
    }

    pub(crate) fn peak_units(&self) -> usize {
        self.peak_units
    }

    /// `S[i][j]`: unsatisfied clauses of current length `i <= 3` with `j`
    /// agreeing unset literals.
    pub(crate) fn counts(&self) -> &[[usize; 4]; 4] {
        &self.counts
    }

    /// Unsatisfied clauses containing the literal with this code.
    pub(crate) fn occurrences(&self, code: u32) -> u32 {
        self.occ_count[code as usize]
    }

    pub(crate) fn trail_len(&self) -> usize {
        self.trail.as_ref().map_or(0, Vec::len)
    }

    pub(crate) fn model(&self) -> Assignment {
        Assignment::new(self.value.iter().map(|&v| v == TRUE).collect())
    }

    /// Uniformly random unset variable with a uniformly random value.
    pub(crate) fn random_literal(&self, rng: &mut SatRng) -> Literal {
        let v = self.random_unset(rng);
        Literal::new(v + 1, coin(rng))
    }

    pub(crate) fn random_unset(&self, rng: &mut SatRng) -> usize {
        self.unset[below(rng, self.unset.len())] as usize
    }

    fn clause_lits(&self, c: u32) -> &[u32] {
        &self.lits[self.start[c as usize] as usize..self.start[c as usize + 1] as usize]
    }

    fn push_change(&mut self, ch: Change) {
        if let Some(t) = self.trail.as_mut() {
            t.push(ch);
        }
    }

    fn add_unit(&mut self, c: u32) {
        self.unit_pos[c as usize] = self.units.len() as u32;
        self.units.push(c);
        self.peak_units = self.peak_units.max(self.units.len());
    }

    fn remove_unit(&mut self, c: u32) {
        let pos = self.unit_pos[c as usize];
        if pos == NONE {
            return;
        }
        let last = self.units.pop().expect("unit list holds c");
        if last != c {
            self.units[pos as usize] = last;
            self.unit_pos[last as usize] = pos;
        }
        self.unit_pos[c as usize] = NONE;
    }

    fn bump(&mut self, c: u32, delta: isize) {
        let (l, k) = (self.len[c as usize] as usize, self.class[c as usize] as usize);
        if l <= 3 {
            self.counts[l][k] = (self.counts[l][k] as isize + delta) as usize;
        }
    }

    fn satisfy(&mut self, c: u32) {
        self.satisfied[c as usize] = true;
        self.alive -= 1;
        self.bump(c, -1);
        if self.len[c as usize] == 1 {
            self.remove_unit(c);
        }
        let (s, e) = (self.start[c as usize] as usize, self.start[c as usize + 1] as usize);
        for i in s..e {
            self.occ_count[self.lits[i] as usize] -= 1;
        }
        self.push_change(Change::Satisfied(c));
    }

    /// Sets `lit` true. Returns `false` if some clause became empty.
    pub(crate) fn assign(&mut self, lit: Literal) -> bool {
        let v = lit.index();
        debug_assert_eq!(self.value[v], UNSET, "variable set twice");
        self.value[v] = if lit.is_positive() { TRUE } else { FALSE };
        let pos = self.unset_pos[v] as usize;
        let last = self.unset.pop().expect("variable was unset");
        if last as usize != v {
            self.unset[pos] = last;
            self.unset_pos[last as usize] = pos as u32;
        }
        self.unset_pos[v] = NONE;
        self.push_change(Change::Assign(v as u32));
        if let Some(log) = self.log.as_mut() {
            log.push(lit);
        }

        let code = lit.code() as usize;
        for i in self.occ_start[code]..self.occ_start[code + 1] {
            let c = self.occ[i as usize];
            if !self.satisfied[c as usize] {
                self.satisfy(c);
            }
        }
        let neg = code ^ 1;
        let agreeing = self.agree[neg];
        for i in self.occ_start[neg]..self.occ_start[neg + 1] {
            let c = self.occ[i as usize];
            if self.satisfied[c as usize] {
                continue;
            }
            self.bump(c, -1);
            let was_unit = self.len[c as usize] == 1;
            self.len[c as usize] -= 1;
            if agreeing {
                self.class[c as usize] -= 1;
            }
            self.bump(c, 1);
            self.push_change(Change::Shortened { clause: c, agreeing });
            match self.len[c as usize] {
                1 => self.add_unit(c),
                0 => {
                    if was_unit {
                        self.remove_unit(c);
                    }
                    self.conflict = true;
                }
                _ => {}
            }
        }
        !self.conflict
    }

    /// Satisfies unit clauses, picked uniformly among those present, until
    /// none remain or a clause becomes empty.
    pub(crate) fn propagate(&mut self, rng: &mut SatRng) -> bool {
        while !self.conflict && !self.units.is_empty() {
            let c = self.units[below(rng, self.units.len())];
            let lit = self
                .clause_lits(c)
                .iter()
                .copied()
                .find(|&l| self.value[(l >> 1) as usize] == UNSET)
                .expect("unit clause has one unset literal");
            if !self.assign(Literal::from_code(lit)) {
                return false;
            }
        }
        !self.conflict
    }

    /// Rolls back to trail length `mark`, which must be a point where
    /// propagation had completed without conflict.
    pub(crate) fn undo_to(&mut self, mark: usize) {
        for c in std::mem::take(&mut self.units) {
            self.unit_pos[c as usize] = NONE;
        }
        let mut trail = self.trail.take().expect("undo requires a trail");
        while trail.len() > mark {
            match trail.pop().unwrap() {
                Change::Assign(v) => {
                    self.value[v as usize] = UNSET;
                    self.unset_pos[v as usize] = self.unset.len() as u32;
                    self.unset.push(v);
                }
                Change::Satisfied(c) => {
                    self.satisfied[c as usize] = false;
                    self.alive += 1;
                    self.bump(c, 1);
                    let (s, e) = (self.start[c as usize] as usize, self.start[c as usize + 1] as usize);
                    for i in s..e {
                        self.occ_count[self.lits[i] as usize] += 1;
                    }
                }
                Change::Shortened { clause, agreeing } => {
                    self.bump(clause, -1);
                    self.len[clause as usize] += 1;
                    if agreeing {
                        self.class[clause as usize] += 1;
                    }
                    self.bump(clause, 1);
                }
            }
        }
        self.trail = Some(trail);
        self.conflict = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Clause;
    use crate::rng::rng_from_seed;

    fn formula(n: usize, clauses: &[&[i64]]) -> Formula {
        Formula::new(n, 3, clauses.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
    }

    #[test]
    fn propagation_chain() {
        let f = formula(3, &[&[-1, 2], &[-2, 3]]);
        let mut r = Residual::new(&f, None, true);
        let mut rng = rng_from_seed(0);
        assert!(r.assign(Literal::new(1, true)));
        assert!(r.propagate(&mut rng));
        assert_eq!(r.alive(), 0);
        assert_eq!(r.model().to_bits(), "111");
    }

    #[test]
    fn conflict_and_undo_restore_state() {
        let f = formula(3, &[&[-1, 2], &[-1, -2], &[1, 2, 3]]);
        let mut r = Residual::new(&f, None, true);
        let before = (r.counts, r.occ_count.clone(), r.alive, r.len.clone(), r.class.clone());
        let mut rng = rng_from_seed(3);
        let mark = r.trail_len();
        let ok = r.assign(Literal::new(1, true)) && r.propagate(&mut rng);
        assert!(!ok);
        r.undo_to(mark);
        assert!(!r.has_conflict());
        assert_eq!(r.num_unset(), 3);
        assert_eq!(before, (r.counts, r.occ_count.clone(), r.alive, r.len.clone(), r.class.clone()));
        assert!(r.assign(Literal::new(1, false)));
        assert!(r.propagate(&mut rng));
    }

    #[test]
    fn initial_units_and_empty_clauses() {
        let f = Formula::new(2, 1, vec![Clause::from_dimacs(&[1]), Clause::from_dimacs(&[-1])]).unwrap();
        let r = Residual::new(&f, None, false);
        assert_eq!(r.pending_units(), 2);
        let f = Formula::new(2, 1, vec![Clause::new(vec![])]).unwrap();
        assert!(Residual::new(&f, None, false).has_conflict());
    }

    #[test]
    fn tautologies_dropped_duplicates_merged() {
        let f = Formula::new(3, 3, vec![Clause::from_dimacs(&[1, -1, 2]), Clause::from_dimacs(&[2, 2, 3])]).unwrap();
        let r = Residual::new(&f, None, false);
        assert_eq!(r.alive(), 1);
        assert_eq!(r.counts()[2][2], 1);
    }
}
