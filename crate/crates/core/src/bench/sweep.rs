use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fingerprint, write_csv, write_json, TrialLog};
use crate::dimacs::write_dimacs;
use crate::generator::{sample_instance, GeneratorSpec, HiddenMode, HiddenInstance};
use crate::rng::derive_seed;
use crate::solvers::{dpll_solve, walksat_solve, BranchRule, DpllParams, SolveStatus, WalksatInit, WalksatParams};
use crate::stats::{quartiles, Proportion};
use crate::uc::{uc_run, uc_trial_seeds};
use crate::{Error, Result};

/// Restart key: (hidden count, n, density bits, trial).
type CellKey = (u8, usize, u64, usize);

fn key(mode: HiddenMode, n: usize, r: f64, trial: usize) -> CellKey {
    (mode.hidden_count() as u8, n, r.to_bits(), trial)
}

fn validate_grid(modes: &[HiddenMode], n: usize, densities: &[f64], trials: usize) -> Result<()> {
    if modes.is_empty() || densities.is_empty() {
        return Err(Error::Config("at least one mode and one density are required".into()));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if n < 3 {
        return Err(Error::Config(format!("n = {n} is too small for 3-SAT")));
    }
    if densities.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::Config("densities must be non-negative numbers".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcSweepConfig {
    pub modes: Vec<HiddenMode>,
    pub n: usize,
    pub densities: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Stem of the output files.
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcTrialRecord {
    pub mode: HiddenMode,
    pub n: usize,
    pub r: f64,
    pub trial: usize,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub success: bool,
    pub steps: usize,
    pub failure_step: Option<usize>,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcCell {
    pub mode: HiddenMode,
    pub n: usize,
    pub r: f64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcSweepSummary {
    pub config: UcSweepConfig,
    pub cells: Vec<UcCell>,
    /// Per mode, the smallest swept density whose success rate is at most
    /// [`VANISHING_RATE`].
    pub vanishing_density: Vec<(HiddenMode, Option<f64>)>,
}

pub const VANISHING_RATE: f64 = 0.02;

/// `<name>.csv` (one row per mode and density), `<name>_trials.jsonl` and
/// `<name>_summary.json`.
pub fn cmd_uc_sweep(cfg: &UcSweepConfig) -> Result<UcSweepSummary> {
    validate_grid(&cfg.modes, cfg.n, &cfg.densities, cfg.trials)?;
    ensure_dir(&cfg.out_dir)?;
    let mut log: TrialLog<CellKey, UcTrialRecord> =
        TrialLog::open(cfg.out_dir.join(format!("{}_trials.jsonl", cfg.name)), |t: &UcTrialRecord| key(t.mode, t.n, t.r, t.trial))?;
    let mut cells = Vec::new();
    for &mode in &cfg.modes {
        for &r in &cfg.densities {
            let todo: Vec<usize> = (0..cfg.trials).filter(|&t| !log.contains(&key(mode, cfg.n, r, t))).collect();
            let batch = todo
                .into_par_iter()
                .map(|trial| {
                    let (instance_seed, run_seed) = uc_trial_seeds(cfg.seed, mode, cfg.n, r, trial);
                    let inst = sample_instance(&GeneratorSpec::with_density(cfg.n, 3, r, mode, instance_seed))?;
                    let o = uc_run(&inst.formula, None, run_seed)?;
                    let rec = UcTrialRecord {
                        mode,
                        n: cfg.n,
                        r,
                        trial,
                        instance_seed,
                        run_seed,
                        success: o.success,
                        steps: o.steps,
                        failure_step: o.failure_step,
                        fingerprint: fingerprint(&write_dimacs(&inst.formula, false)),
                    };
                    Ok((key(mode, cfg.n, r, trial), rec))
                })
                .collect::<Result<Vec<_>>>()?;
            log.append(batch)?;
            let wins = (0..cfg.trials)
                .filter(|&t| {
                    log.get(&key(mode, cfg.n, r, t)).is_some_and(|rec| rec.success)
                })
                .count();
            let p = Proportion::wilson95(wins, cfg.trials);
            cells.push(UcCell {
                mode,
                n: cfg.n,
                r,
                trials: cfg.trials,
                successes: wins,
                rate: p.rate,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
            });
        }
    }
    let vanishing_density = cfg
        .modes
        .iter()
        .map(|&m| {
            let mut rs: Vec<&UcCell> = cells.iter().filter(|c| c.mode == m).collect();
            rs.sort_by(|a, b| a.r.total_cmp(&b.r));
            (m, rs.iter().find(|c| c.rate <= VANISHING_RATE).map(|c| c.r))
        })
        .collect();
    write_csv(&cfg.out_dir.join(format!("{}.csv", cfg.name)), &cells)?;
    let summary = UcSweepSummary {
        config: cfg.clone(),
        cells,
        vanishing_density,
    };
    write_json(&cfg.out_dir.join(format!("{}_summary.json", cfg.name)), &summary)?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Walksat,
    Dpll,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Random,
    /// Agreement with the first hidden assignment.
    Biased(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSweepConfig {
    pub solver: SolverKind,
    pub modes: Vec<HiddenMode>,
    pub n: usize,
    pub densities: Vec<f64>,
    pub instances: usize,
    /// Flip budget for WalkSAT, branching budget for DPLL.
    pub budget: u64,
    pub rule: BranchRule,
    pub init: InitKind,
    pub greedy_probability: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub name: String,
}

impl SolverSweepConfig {
    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.modes, self.n, &self.densities, self.instances)?;
        if !(0.0..=1.0).contains(&self.greedy_probability) {
            return Err(Error::Config("greedy probability must lie in [0, 1]".into()));
        }
        if let (SolverKind::Walksat, InitKind::Biased(a)) = (self.solver, self.init) {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config("agreement must lie in [0, 1]".into()));
            }
            if self.modes.contains(&HiddenMode::Zero) {
                return Err(Error::Config("biased initialisation needs a hidden assignment; drop mode 0".into()));
            }
        }
        Ok(())
    }

    pub fn variant(&self) -> String {
        match (self.solver, self.init) {
            (SolverKind::Dpll, _) => self.rule.name().to_string(),
            (SolverKind::Walksat, InitKind::Random) => "random_init".to_string(),
            (SolverKind::Walksat, InitKind::Biased(a)) => format!("biased_{a}"),
        }
    }

    fn solver_name(&self) -> &'static str {
        match self.solver {
            SolverKind::Walksat => "walksat",
            SolverKind::Dpll => "dpll",
        }
    }
}

/// Instance seed shared by every solver and variant, so different sweeps
/// with the same master seed run on the same formulas.
pub fn instance_seed(master: u64, mode: HiddenMode, n: usize, r: f64, index: usize) -> u64 {
    derive_seed(master, &[0x1457, mode.hidden_count() as u64, n as u64, r.to_bits(), index as u64])
}

fn solver_seed(master: u64, mode: HiddenMode, n: usize, r: f64, index: usize) -> u64 {
    derive_seed(master, &[0x5017, mode.hidden_count() as u64, n as u64, r.to_bits(), index as u64])
}

/// One solve: the CSV row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub mode: HiddenMode,
    pub n: usize,
    pub r: f64,
    pub trial: usize,
    pub instance_seed: u64,
    pub seed: u64,
    pub solver: String,
    pub variant: String,
    pub budget: u64,
    pub status: SolveStatus,
    pub work: u64,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mode: HiddenMode,
    pub n: usize,
    pub r: f64,
    pub trials: usize,
    pub solved: usize,
    pub exhausted: usize,
    /// Order statistics of the work counter; exhausted runs count at the budget.
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianRatio {
    pub r: f64,
    pub numerator: HiddenMode,
    pub denominator: HiddenMode,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSweepSummary {
    pub config: SolverSweepConfig,
    pub cells: Vec<SweepCell>,
    pub ratios: Vec<MedianRatio>,
}

impl SolverSweepSummary {
    pub fn cell(&self, mode: HiddenMode, r: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.mode == mode && c.r == r)
    }

    pub fn ratio(&self, r: f64, numerator: HiddenMode, denominator: HiddenMode) -> Option<f64> {
        self.ratios
            .iter()
            .find(|x| x.r == r && x.numerator == numerator && x.denominator == denominator)
            .map(|x| x.ratio)
    }
}

fn solve_one(cfg: &SolverSweepConfig, inst: &HiddenInstance, seed: u64) -> (SolveStatus, u64) {
    let f = &inst.formula;
    let res = match cfg.solver {
        SolverKind::Walksat => {
            let init = match cfg.init {
                InitKind::Random => WalksatInit::UniformRandom,
                InitKind::Biased(agreement) => WalksatInit::Biased {
                    target: inst.hidden[0].clone(),
                    agreement,
                },
            };
            let mut p = WalksatParams::new(cfg.budget, init, seed);
            p.greedy_probability = cfg.greedy_probability;
            walksat_solve(f, &p)
        }
        SolverKind::Dpll => dpll_solve(
            f,
            &DpllParams {
                branch_rule: cfg.rule,
                branching_budget: cfg.budget,
                seed,
            },
        ),
    };
    if let Some(m) = &res.model {
        assert!(f.is_model(m), "solver returned a non-model");
    }
    (res.status, res.work)
}

/// `<name>.csv` (one row per mode and density), `<name>_trials.csv`,
/// `<name>_trials.jsonl` (the restart log) and `<name>_summary.json`.
pub fn cmd_solver_sweep(cfg: &SolverSweepConfig) -> Result<SolverSweepSummary> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    let variant = cfg.variant();
    let solver = cfg.solver_name();
    let log_path = cfg.out_dir.join(format!("{}_trials.jsonl", cfg.name));
    let mut log: TrialLog<CellKey, TrialRecord> = TrialLog::open(log_path.clone(), |t: &TrialRecord| key(t.mode, t.n, t.r, t.trial))?;
    if let Some((_, stale)) = log
        .records()
        .find(|(_, t)| t.solver != solver || t.variant != variant || t.budget != cfg.budget)
    {
        return Err(Error::Config(format!(
            "{} holds {} {} runs with budget {}; use another --name",
            log_path.display(),
            stale.solver,
            stale.variant,
            stale.budget
        )));
    }

    let mut cells = Vec::new();
    let mut trials_out = Vec::new();
    for &mode in &cfg.modes {
        for &r in &cfg.densities {
            let todo: Vec<usize> = (0..cfg.instances).filter(|&t| !log.contains(&key(mode, cfg.n, r, t))).collect();
            let batch = todo
                .into_par_iter()
                .map(|trial| {
                    let iseed = instance_seed(cfg.seed, mode, cfg.n, r, trial);
                    let inst = sample_instance(&GeneratorSpec::with_density(cfg.n, 3, r, mode, iseed))?;
                    let seed = solver_seed(cfg.seed, mode, cfg.n, r, trial);
                    let (status, work) = solve_one(cfg, &inst, seed);
                    let rec = TrialRecord {
                        mode,
                        n: cfg.n,
                        r,
                        trial,
                        instance_seed: iseed,
                        seed,
                        solver: solver.to_string(),
                        variant: variant.clone(),
                        budget: cfg.budget,
                        status,
                        work,
                        fingerprint: fingerprint(&write_dimacs(&inst.formula, false)),
                    };
                    Ok((key(mode, cfg.n, r, trial), rec))
                })
                .collect::<Result<Vec<_>>>()?;
            log.append(batch)?;
            let recs: Vec<TrialRecord> = (0..cfg.instances)
                .filter_map(|t| log.get(&key(mode, cfg.n, r, t)).cloned())
                .collect();
            let work: Vec<f64> = recs.iter().map(|t| t.work as f64).collect();
            let q = quartiles(&work).expect("at least one trial");
            cells.push(SweepCell {
                mode,
                n: cfg.n,
                r,
                trials: recs.len(),
                solved: recs.iter().filter(|t| t.status != SolveStatus::BudgetExhausted).count(),
                exhausted: recs.iter().filter(|t| t.status == SolveStatus::BudgetExhausted).count(),
                q1: q.q1,
                median: q.median,
                q3: q.q3,
            });
            trials_out.extend(recs);
        }
    }
    let mut ratios = Vec::new();
    for &r in &cfg.densities {
        for &a in &cfg.modes {
            for &b in &cfg.modes {
                if a == b {
                    continue;
                }
                let find = |m| cells.iter().find(|c: &&SweepCell| c.mode == m && c.r == r).map(|c| c.median);
                if let (Some(x), Some(y)) = (find(a), find(b)) {
                    ratios.push(MedianRatio {
                        r,
                        numerator: a,
                        denominator: b,
                        ratio: x / y,
                    });
                }
            }
        }
    }
    write_csv(&cfg.out_dir.join(format!("{}.csv", cfg.name)), &cells)?;
    write_csv(&cfg.out_dir.join(format!("{}_trials.csv", cfg.name)), &trials_out)?;
    let summary = SolverSweepSummary {
        config: cfg.clone(),
        cells,
        ratios,
    };
    write_json(&cfg.out_dir.join(format!("{}_summary.json", cfg.name)), &summary)?;
    Ok(summary)
}
