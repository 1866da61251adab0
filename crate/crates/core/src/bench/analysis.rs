use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fmt_density, write_csv, write_json};
use crate::generator::{initial_density_profile3, HiddenMode};
use crate::moment::{
    argmax_alpha, asymptotic_upper_bound, dominance_asymptote, dominance_threshold, Landscape, OverlapCurve, DOMINANCE_K_RANGE,
};
use crate::ode::{critical_density_with, integrate_uc, IntegrationOptions, TrajectoryStatus};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvesConfig {
    pub k: usize,
    pub densities: Vec<f64>,
    /// Grid points over `[0, 1]`, endpoints included.
    pub points: usize,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub log_f: f64,
    pub log_g: f64,
    pub log_zero_hidden: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveExtrema {
    pub r: f64,
    pub file: String,
    pub argmax_f: f64,
    pub max_log_f: f64,
    pub argmax_g: f64,
    pub max_log_g: f64,
    /// Grid-resolution local maxima of `ln g` as `(alpha, value)`.
    pub g_local_maxima: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvesSummary {
    pub config: CurvesConfig,
    pub curves: Vec<CurveExtrema>,
}

/// One `curves_k<k>_r<r>.csv` per density plus `curves_k<k>_summary.json`.
pub fn cmd_curves(cfg: &CurvesConfig) -> Result<CurvesSummary> {
    if cfg.k < 2 || cfg.k > 62 {
        return Err(Error::Config(format!("clause width {} outside 2..=62", cfg.k)));
    }
    if cfg.points < 3 {
        return Err(Error::Config("need at least 3 grid points".into()));
    }
    if cfg.densities.is_empty() || cfg.densities.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::Config("densities must be a non-empty list of non-negative numbers".into()));
    }
    ensure_dir(&cfg.out_dir)?;
    let k = cfg.k;
    let curves = cfg
        .densities
        .par_iter()
        .map(|&r| {
            let f = OverlapCurve::sample(Landscape::OneHidden, k, r, cfg.points);
            let g = OverlapCurve::sample(Landscape::TwoHidden, k, r, cfg.points);
            let z = OverlapCurve::sample(Landscape::ZeroHidden, k, r, cfg.points);
            let rows: Vec<CurveRow> = (0..cfg.points)
                .map(|i| CurveRow {
                    alpha: f.samples[i].0,
                    log_f: f.samples[i].1,
                    log_g: g.samples[i].1,
                    log_zero_hidden: z.samples[i].1,
                })
                .collect();
            let file = format!("curves_k{k}_r{}.csv", fmt_density(r));
            write_csv(&cfg.out_dir.join(&file), &rows)?;
            let (argmax_f, max_log_f) = argmax_alpha(Landscape::OneHidden, k, r, 1e-9);
            let (argmax_g, max_log_g) = argmax_alpha(Landscape::TwoHidden, k, r, 1e-9);
            Ok(CurveExtrema {
                r,
                file,
                argmax_f,
                max_log_f,
                argmax_g,
                max_log_g,
                g_local_maxima: g.local_maxima(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = CurvesSummary { config: cfg.clone(), curves };
    write_json(&cfg.out_dir.join(format!("curves_k{k}_summary.json")), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsConfig {
    pub ks: Vec<usize>,
    /// Bisection width for the dominance threshold; by default `1e-3` for
    /// `k <= 10` and `0.1` above.
    pub tol: Option<f64>,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub k: usize,
    pub r_star: f64,
    pub upper_bound: f64,
    pub epsilon_k: f64,
}

/// `thresholds.csv` with columns `k,r_star,upper_bound,epsilon_k`.
pub fn cmd_thresholds(cfg: &ThresholdsConfig) -> Result<Vec<ThresholdRow>> {
    if let Some(k) = cfg.ks.iter().find(|k| !DOMINANCE_K_RANGE.contains(k)) {
        return Err(Error::Config(format!("k = {k} outside the supported range 3..=20")));
    }
    if cfg.tol.is_some_and(|t| !(t > 0.0)) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    ensure_dir(&cfg.out_dir)?;
    let rows = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let tol = cfg.tol.unwrap_or(if k <= 10 { 1e-3 } else { 0.1 });
            let t = dominance_threshold(k, tol)?;
            Ok(ThresholdRow {
                k,
                r_star: t.r_star,
                upper_bound: asymptotic_upper_bound(k),
                epsilon_k: dominance_asymptote(k) - t.r_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(&cfg.out_dir.join("thresholds.csv"), &rows)?;
    write_json(&cfg.out_dir.join("thresholds_summary.json"), &serde_json::json!({ "config": cfg, "rows": rows }))?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub modes: Vec<HiddenMode>,
    pub densities: Vec<f64>,
    pub step: f64,
    /// Write every `every`-th integration step to the trajectory CSVs.
    pub every: usize,
    /// Bisection tolerance for the critical densities.
    pub tol: f64,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeRun {
    pub mode: HiddenMode,
    pub r: f64,
    pub file: String,
    pub status: TrajectoryStatus,
    pub max_lambda1: f64,
    pub x_at_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSummary {
    pub config: OdeConfig,
    pub critical_density: Vec<(HiddenMode, f64)>,
    pub runs: Vec<OdeRun>,
}

/// `ode_<mode>_r<r>.csv` trajectories and `ode_summary.json` with the
/// critical density of each mode.
pub fn cmd_ode(cfg: &OdeConfig) -> Result<OdeSummary> {
    if cfg.modes.is_empty() {
        return Err(Error::Config("at least one mode is required".into()));
    }
    if !(cfg.step > 0.0 && cfg.step < 0.1) || !(cfg.tol > 0.0) {
        return Err(Error::Config("step must lie in (0, 0.1) and tolerance must be positive".into()));
    }
    if cfg.densities.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::Config("densities must be non-negative numbers".into()));
    }
    ensure_dir(&cfg.out_dir)?;
    let opts = IntegrationOptions {
        step: cfg.step,
        ..IntegrationOptions::default()
    };
    let critical_density = cfg
        .modes
        .par_iter()
        .map(|&m| Ok((m, critical_density_with(m, cfg.tol, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(HiddenMode, f64)> = cfg.modes.iter().flat_map(|&m| cfg.densities.iter().map(move |&r| (m, r))).collect();
    let runs = cells
        .par_iter()
        .map(|&(mode, r)| {
            let traj = integrate_uc(initial_density_profile3(r, mode), opts)?;
            let file = format!("ode_{mode}_r{}.csv", fmt_density(r));
            traj.write_csv(fs::File::create(cfg.out_dir.join(&file))?, cfg.every)?;
            let peak = traj
                .samples
                .iter()
                .max_by(|a, b| a.lambda1.total_cmp(&b.lambda1))
                .expect("trajectory is non-empty");
            Ok(OdeRun {
                mode,
                r,
                file,
                status: traj.status,
                max_lambda1: peak.lambda1,
                x_at_max: peak.state.x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = OdeSummary {
        config: cfg.clone(),
        critical_density,
        runs,
    };
    write_json(&cfg.out_dir.join("ode_summary.json"), &summary)?;
    Ok(summary)
}
