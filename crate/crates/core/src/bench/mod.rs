//! Experiment drivers behind the command-line tool.
//!
//! Every driver takes a serializable config, validates it before doing any
//! work, derives all randomness from the config's master seed, and writes
//! CSV data plus a JSON summary embedding the resolved config. Sweeps keep a
//! JSON-lines record of finished trials so an interrupted run resumes where it
//! stopped.

mod analysis;
mod generate;
mod sweep;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub use analysis::{cmd_curves, cmd_ode, cmd_thresholds, CurvesConfig, CurvesSummary, OdeConfig, OdeSummary, ThresholdRow, ThresholdsConfig};
pub use generate::{cmd_generate, instance_file_name, GenerateConfig, GeneratedInstance, GenerateManifest};
pub use sweep::{
    cmd_solver_sweep, cmd_uc_sweep, instance_seed, InitKind, SolverKind, SolverSweepConfig, SolverSweepSummary, SweepCell, TrialRecord,
    UcSweepConfig, UcSweepSummary, UcTrialRecord,
};

/// Hex SHA-256 of the instance's DIMACS text (hidden assignments not revealed).
pub fn fingerprint(dimacs: &str) -> String {
    hex::encode(Sha256::digest(dimacs.as_bytes()))
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--parallel must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Short decimal form used in file names (`4.25`, `20`).
pub(crate) fn fmt_density(r: f64) -> String {
    format!("{r}")
}

/// Append-only JSON-lines log of finished trials.
pub(crate) struct TrialLog<K, R> {
    path: PathBuf,
    done: BTreeMap<K, R>,
}

impl<K: Ord + Clone, R: Serialize + DeserializeOwned + Clone> TrialLog<K, R> {
    /// Loads existing records. A truncated last line from an interrupted run
    /// is ignored.
    pub(crate) fn open(path: PathBuf, key: impl Fn(&R) -> K) -> Result<Self> {
        let mut done = BTreeMap::new();
        if path.exists() {
            let lines: Vec<String> = BufReader::new(fs::File::open(&path)?).lines().collect::<std::io::Result<_>>()?;
            let last = lines.len().saturating_sub(1);
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<R>(line) {
                    Ok(rec) => {
                        done.insert(key(&rec), rec);
                    }
                    Err(_) if i == last => {}
                    Err(e) => return Err(e.into()),
                }
            }
            // Rewrite so the file holds only complete records.
            let mut f = fs::File::create(&path)?;
            for rec in done.values() {
                writeln!(f, "{}", serde_json::to_string(rec)?)?;
            }
        }
        Ok(TrialLog { path, done })
    }

    pub(crate) fn contains(&self, k: &K) -> bool {
        self.done.contains_key(k)
    }

    pub(crate) fn get(&self, k: &K) -> Option<&R> {
        self.done.get(k)
    }

    pub(crate) fn append(&mut self, batch: Vec<(K, R)>) -> Result<()> {
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&self.path)?;
        for (k, rec) in batch {
            writeln!(f, "{}", serde_json::to_string(&rec)?)?;
            self.done.insert(k, rec);
        }
        f.flush()?;
        Ok(())
    }

    pub(crate) fn records(&self) -> impl Iterator<Item = (&K, &R)> {
        self.done.iter()
    }
}
