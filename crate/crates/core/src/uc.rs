//! The Unit Clause heuristic on concrete 3-SAT formulas.
//!
//! A round is one free step (uniform unset variable, uniform value) followed
//! by unit propagation until no unit clause remains, picking uniformly among
//! the current unit clauses each time. UC never backtracks: an empty clause
//! ends the run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Formula, Literal};
use crate::generator::{sample_instance, GeneratorSpec, HiddenMode};
use crate::ode::{lambda1, ClauseDensityState, Trajectory};
use crate::residual::Residual;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::Proportion;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcOutcome {
    pub success: bool,
    /// Full model on success. On failure, the partial assignment at the
    /// conflict with unset variables reported as false.
    pub assignment: Assignment,
    /// Rounds started, including the failing one.
    pub steps: usize,
    /// 1-based index of the round that produced an empty clause.
    pub failure_step: Option<usize>,
    pub peak_unit_queue: usize,
}

/// Exact clause counts at a round boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSample {
    pub variables_set: usize,
    pub s3: [usize; 4],
    pub s2: [usize; 3],
}

impl TraceSample {
    pub fn scaled(&self, n: usize) -> ClauseDensityState {
        let n = n as f64;
        ClauseDensityState {
            x: self.variables_set as f64 / n,
            s3: self.s3.map(|c| c as f64 / n),
            s2: self.s2.map(|c| c as f64 / n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub n: usize,
    pub samples: Vec<TraceSample>,
}

impl DensityTrace {
    /// Sup-norm distance between the scaled counts and `traj`, over samples
    /// inside the trajectory's range.
    pub fn deviation_from(&self, traj: &Trajectory) -> f64 {
        let x_max = traj.last().state.x;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let emp = s.scaled(self.n);
            if emp.x > x_max {
                continue;
            }
            let th = traj.state_at(emp.x);
            for j in 0..4 {
                worst = worst.max((emp.s3[j] - th.s3[j]).abs());
            }
            for j in 0..3 {
                worst = worst.max((emp.s2[j] - th.s2[j]).abs());
            }
        }
        worst
    }

    /// Same columns as the trajectory CSV with `n` first. λ₁ is computed from
    /// the scaled counts (empty once every variable is set).
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "x", "s30", "s31", "s32", "s33", "s20", "s21", "s22", "lambda1"])?;
        for s in &self.samples {
            let st = s.scaled(self.n);
            let mut row = vec![self.n.to_string(), st.x.to_string()];
            row.extend(st.s3.iter().chain(&st.s2).map(|v| v.to_string()));
            row.push(if st.x < 1.0 { lambda1(&st).to_string() } else { String::new() });
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_three_sat(f: &Formula) -> Result<()> {
    if f.width() != 3 || f.clauses().iter().any(|c| c.len() > 3) {
        return Err(Error::Domain(format!("Unit Clause needs a 3-SAT formula, got width {}", f.width())));
    }
    Ok(())
}

pub(crate) struct UcRun {
    pub outcome: UcOutcome,
    pub trace: Option<DensityTrace>,
    pub log: Vec<Literal>,
}

fn sample(res: &Residual) -> TraceSample {
    let c = res.counts();
    TraceSample {
        variables_set: res.variables_set(),
        s3: c[3],
        s2: [c[2][0], c[2][1], c[2][2]],
    }
}

pub(crate) fn run(f: &Formula, hidden: Option<&Assignment>, seed: u64, trace_every: Option<usize>, log: bool) -> Result<UcRun> {
    check_three_sat(f)?;
    if let Some(h) = hidden {
        if h.len() != f.num_vars() {
            return Err(Error::Domain(format!(
                "hidden assignment has {} values for {} variables",
                h.len(),
                f.num_vars()
            )));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut res = Residual::new(f, hidden, false);
    if log {
        res.enable_log();
    }
    let mut samples = Vec::new();
    let every = trace_every.map(|e| e.max(1));

    let mut ok = !res.has_conflict() && res.propagate(&mut rng);
    if every.is_some() {
        samples.push(sample(&res));
    }
    let mut steps = 0;
    while ok && res.num_unset() > 0 {
        steps += 1;
        let lit = res.random_literal(&mut rng);
        ok = res.assign(lit) && res.propagate(&mut rng);
        if let Some(e) = every {
            if ok && (steps % e == 0 || res.num_unset() == 0) {
                samples.push(sample(&res));
            }
        }
    }
    let outcome = UcOutcome {
        success: ok,
        assignment: res.model(),
        steps,
        failure_step: (!ok).then_some(steps),
        peak_unit_queue: res.peak_units(),
    };
    debug_assert!(!outcome.success || f.is_model(&outcome.assignment));
    Ok(UcRun {
        outcome,
        trace: every.map(|_| DensityTrace { n: f.num_vars(), samples }),
        log: res.take_log(),
    })
}

/// Runs UC once. `hidden` sets the agreement classes used by traces; it does
/// not influence the run itself.
pub fn uc_run(f: &Formula, hidden: Option<&Assignment>, seed: u64) -> Result<UcOutcome> {
    Ok(run(f, hidden, seed, None, false)?.outcome)
}

/// Runs UC and samples the clause counts every `sample_every` rounds (and
/// before the first and after the last round).
pub fn uc_run_traced(f: &Formula, hidden: Option<&Assignment>, seed: u64, sample_every: usize) -> Result<(UcOutcome, DensityTrace)> {
    let r = run(f, hidden, seed, Some(sample_every), false)?;
    Ok((r.outcome, r.trace.expect("tracing was requested")))
}

/// Trace classified against the formula's first hidden assignment, or by
/// literal sign when it has none.
pub fn empirical_density_trace(f: &Formula, seed: u64, sample_every: usize) -> Result<DensityTrace> {
    Ok(uc_run_traced(f, f.hidden().first(), seed, sample_every)?.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcRatePoint {
    pub mode: HiddenMode,
    pub n: usize,
    pub r: f64,
    #[serde(flatten)]
    pub rate: Proportion,
}

/// Seeds for trial `trial` at density `r`: (instance, UC run).
pub fn uc_trial_seeds(master_seed: u64, mode: HiddenMode, n: usize, r: f64, trial: usize) -> (u64, u64) {
    let base = [mode.hidden_count() as u64, n as u64, r.to_bits(), trial as u64];
    let inst = derive_seed(master_seed, &[base[0], base[1], base[2], base[3], 0]);
    let run = derive_seed(master_seed, &[base[0], base[1], base[2], base[3], 1]);
    (inst, run)
}

pub fn uc_trial(master_seed: u64, mode: HiddenMode, n: usize, r: f64, trial: usize) -> Result<UcOutcome> {
    let (inst_seed, run_seed) = uc_trial_seeds(master_seed, mode, n, r, trial);
    let inst = sample_instance(&GeneratorSpec::with_density(n, 3, r, mode, inst_seed))?;
    uc_run(&inst.formula, None, run_seed)
}

/// Success fractions with 95% Wilson intervals, one per density. Trials run
/// on the current rayon pool; the result does not depend on its size.
pub fn uc_success_rate(mode: HiddenMode, n: usize, densities: &[f64], trials: usize, master_seed: u64) -> Result<Vec<UcRatePoint>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    densities
        .iter()
        .map(|&r| {
            let wins = (0..trials)
                .into_par_iter()
                .map(|t| uc_trial(master_seed, mode, n, r, t).map(|o| o.success))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&s| s)
                .count();
            Ok(UcRatePoint {
                mode,
                n,
                r,
                rate: Proportion::wilson95(wins, trials),
            })
        })
        .collect()
}
