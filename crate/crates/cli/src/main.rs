use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hidden_sat::bench::{
    cmd_curves, cmd_generate, cmd_ode, cmd_solver_sweep, cmd_thresholds, cmd_uc_sweep, with_threads, CurvesConfig, GenerateConfig,
    InitKind, OdeConfig, SolverKind, SolverSweepConfig, ThresholdsConfig, UcSweepConfig,
};
use hidden_sat::solvers::BranchRule;
use hidden_sat::HiddenMode;

#[derive(Parser)]
#[command(name = "hidden-sat", version, about = "Random k-SAT with hidden assignments: instances, analysis curves and solver sweeps")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write DIMACS instances, `.sol` sidecars and a manifest.
    Generate(GenerateArgs),
    /// Sample ln f, ln g and the 0-hidden curve over the overlap.
    Curves(CurvesArgs),
    /// Symmetric-dominance thresholds and asymptotic upper bounds.
    Thresholds(ThresholdsArgs),
    /// Integrate the Unit Clause equations and find critical densities.
    Ode(OdeArgs),
    /// Unit Clause success rates over a density grid.
    UcSweep(UcSweepArgs),
    /// WalkSAT or DPLL work over a density grid.
    SolverSweep(SolverSweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "2")]
    mode: HiddenMode,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 25)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "instances")]
    out: PathBuf,
    #[arg(long, default_value = "inst")]
    prefix: String,
    /// Embed hidden assignments as `c hidden` comment lines.
    #[arg(long)]
    reveal_hidden: bool,
    /// Do not write `.sol` sidecars.
    #[arg(long)]
    no_sidecar: bool,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Densities: comma list, `start:stop:step` ranges allowed.
    #[arg(long = "r-grid", alias = "r", default_value = "16,18,20,22,24")]
    r_grid: String,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long, default_value = "curves")]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,7,10,20")]
    k: Vec<usize>,
    /// Bisection width (default 1e-3 for k <= 10, 0.1 above).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "thresholds")]
    out: PathBuf,
}

#[derive(Args)]
struct OdeArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    mode: Vec<HiddenMode>,
    #[arg(long = "r-grid", alias = "r", default_value = "2.0,2.5")]
    r_grid: String,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Keep every n-th integration step in the CSVs.
    #[arg(long, default_value_t = 100)]
    every: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value = "ode")]
    out: PathBuf,
}

#[derive(Args)]
struct UcSweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,2")]
    mode: Vec<HiddenMode>,
    #[arg(long, default_value_t = 30_000)]
    n: usize,
    #[arg(long = "r-grid", alias = "r", default_value = "2.3:3.0:0.1")]
    r_grid: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "uc_sweep")]
    out: PathBuf,
    /// Stem of the output files.
    #[arg(long, default_value = "uc_sweep")]
    name: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Walksat,
    Dpll,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Biased,
}

#[derive(Args)]
struct SolverSweepArgs {
    #[arg(long, value_enum, default_value = "walksat")]
    solver: SolverArg,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    mode: Vec<HiddenMode>,
    #[arg(long)]
    n: usize,
    #[arg(long = "r-grid", alias = "r")]
    r_grid: String,
    /// Instances per mode and density.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Flips (WalkSAT) or branchings (DPLL) per run.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, default_value = "fixed_false_first")]
    rule: BranchRule,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
    /// Agreement with the hidden assignment for `--init biased`.
    #[arg(long, default_value_t = 0.75)]
    agreement: f64,
    #[arg(long, default_value_t = 0.5)]
    greedy: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "solver_sweep")]
    out: PathBuf,
    #[arg(long)]
    name: Option<String>,
}

/// Comma-separated densities; an item `a:b:s` expands to `a, a+s, ..., <= b`.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad density `{s}`"));
        match parts.as_slice() {
            [x] => out.push(num(x)?),
            [a, b, s] => {
                let (a, b, s) = (num(a)?, num(b)?, num(s)?);
                if !(s > 0.0) || b < a {
                    bail!("bad range `{item}`");
                }
                let count = ((b - a) / s + 1e-9).floor() as usize;
                // Rounded so that 2.3 + 3 * 0.1 prints as 2.6.
                out.extend((0..=count).map(|i| ((a + i as f64 * s) * 1e9).round() / 1e9));
            }
            _ => bail!("bad density item `{item}`"),
        }
    }
    if out.is_empty() {
        bail!("empty density grid");
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let cfg = GenerateConfig {
                mode: a.mode,
                n: a.n,
                k: a.k,
                r: a.r,
                count: a.count,
                seed: a.seed,
                out_dir: a.out,
                prefix: a.prefix,
                reveal_hidden: a.reveal_hidden,
                sidecar: !a.no_sidecar,
            };
            let m = with_threads(cli.parallel, || cmd_generate(&cfg))??;
            println!("wrote {} instances to {}", m.instances.len(), cfg.out_dir.display());
        }
        Command::Curves(a) => {
            let cfg = CurvesConfig {
                k: a.k,
                densities: parse_grid(&a.r_grid)?,
                points: a.points,
                out_dir: a.out,
            };
            let s = with_threads(cli.parallel, || cmd_curves(&cfg))??;
            println!("r\targmax_f\targmax_g\tg_local_maxima");
            for c in &s.curves {
                println!("{}\t{:.6}\t{:.6}\t{}", c.r, c.argmax_f, c.argmax_g, c.g_local_maxima.len());
            }
        }
        Command::Thresholds(a) => {
            let cfg = ThresholdsConfig {
                ks: a.k,
                tol: a.tol,
                out_dir: a.out,
            };
            let rows = with_threads(cli.parallel, || cmd_thresholds(&cfg))??;
            println!("k\tr_star\tupper_bound\tepsilon_k");
            for r in rows {
                println!("{}\t{:.4}\t{:.4}\t{:.4}", r.k, r.r_star, r.upper_bound, r.epsilon_k);
            }
        }
        Command::Ode(a) => {
            let cfg = OdeConfig {
                modes: a.mode,
                densities: parse_grid(&a.r_grid)?,
                step: a.step,
                every: a.every,
                tol: a.tol,
                out_dir: a.out,
            };
            let s = with_threads(cli.parallel, || cmd_ode(&cfg))??;
            for (m, r) in &s.critical_density {
                println!("mode {m}: critical density {r:.4}");
            }
        }
        Command::UcSweep(a) => {
            let cfg = UcSweepConfig {
                modes: a.mode,
                n: a.n,
                densities: parse_grid(&a.r_grid)?,
                trials: a.trials,
                seed: a.seed,
                out_dir: a.out,
                name: a.name,
            };
            let s = with_threads(cli.parallel, || cmd_uc_sweep(&cfg))??;
            println!("mode\tr\trate\tci95");
            for c in &s.cells {
                println!("{}\t{}\t{:.3}\t[{:.3}, {:.3}]", c.mode, c.r, c.rate, c.ci_low, c.ci_high);
            }
        }
        Command::SolverSweep(a) => {
            let solver = match a.solver {
                SolverArg::Walksat => SolverKind::Walksat,
                SolverArg::Dpll => SolverKind::Dpll,
            };
            let init = match a.init {
                InitArg::Random => InitKind::Random,
                InitArg::Biased => InitKind::Biased(a.agreement),
            };
            let mut cfg = SolverSweepConfig {
                solver,
                modes: a.mode,
                n: a.n,
                densities: parse_grid(&a.r_grid)?,
                instances: a.trials,
                budget: a.budget,
                rule: a.rule,
                init,
                greedy_probability: a.greedy,
                seed: a.seed,
                out_dir: a.out,
                name: String::new(),
            };
            cfg.name = a.name.unwrap_or_else(|| cfg.variant());
            let s = with_threads(cli.parallel, || cmd_solver_sweep(&cfg))??;
            println!("mode\tr\tmedian\tq1\tq3\texhausted");
            for c in &s.cells {
                println!("{}\t{}\t{}\t{}\t{}\t{}/{}", c.mode, c.r, c.median, c.q1, c.q3, c.exhausted, c.trials);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_grid;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("2.3:2.6:0.1").unwrap(), vec![2.3, 2.4, 2.5, 2.6]);
        assert_eq!(parse_grid("16, 18,20").unwrap(), vec![16.0, 18.0, 20.0]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("3:2:0.1").is_err());
        assert!(parse_grid("x").is_err());
    }
}
