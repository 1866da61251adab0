use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fingerprint, fmt_density, write_json};
use crate::dimacs::{write_dimacs, write_sidecar};
use crate::generator::{sample_instance, GeneratorSpec, HiddenMode};
use crate::rng::derive_seed;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub mode: HiddenMode,
    pub n: usize,
    pub k: usize,
    pub r: f64,
    pub count: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub prefix: String,
    /// Embed hidden assignments as `c hidden` comments.
    pub reveal_hidden: bool,
    /// Write `.sol` sidecars for hidden modes.
    pub sidecar: bool,
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::Config(format!("density must be a finite non-negative number, got {}", self.r)));
        }
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if self.prefix.is_empty() || self.prefix.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid file prefix `{}`", self.prefix)));
        }
        GeneratorSpec::with_density(self.n, self.k, self.r, self.mode, 0).validate()
    }

    /// Seed of instance `index`.
    pub fn instance_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, &[self.mode.hidden_count() as u64, self.n as u64, self.k as u64, self.r.to_bits(), index as u64])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedInstance {
    pub index: usize,
    pub file: String,
    pub sidecar: Option<String>,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateManifest {
    pub config: GenerateConfig,
    pub instances: Vec<GeneratedInstance>,
}

pub fn instance_file_name(prefix: &str, mode: HiddenMode, n: usize, r: f64, index: usize) -> String {
    format!("{prefix}_{mode}_{n}_{}_{index}.cnf", fmt_density(r))
}

/// Writes the instances, their sidecars and `<prefix>_manifest.json`.
pub fn cmd_generate(cfg: &GenerateConfig) -> Result<GenerateManifest> {
    cfg.validate()?;
    ensure_dir(&cfg.out_dir)?;
    let instances = (0..cfg.count)
        .into_par_iter()
        .map(|index| {
            let seed = cfg.instance_seed(index);
            let inst = sample_instance(&GeneratorSpec::with_density(cfg.n, cfg.k, cfg.r, cfg.mode, seed))?;
            let file = instance_file_name(&cfg.prefix, cfg.mode, cfg.n, cfg.r, index);
            let text = write_dimacs(&inst.formula, cfg.reveal_hidden);
            // The fingerprint identifies the formula itself, whatever comments
            // were written.
            let plain = if cfg.reveal_hidden { write_dimacs(&inst.formula, false) } else { text.clone() };
            fs::write(cfg.out_dir.join(&file), &text)?;
            let sidecar = if cfg.sidecar && !inst.hidden.is_empty() {
                let name = file.replace(".cnf", ".sol");
                fs::write(cfg.out_dir.join(&name), write_sidecar(&inst.hidden))?;
                Some(name)
            } else {
                None
            };
            Ok(GeneratedInstance {
                index,
                file,
                sidecar,
                seed,
                n: cfg.n,
                m: inst.formula.num_clauses(),
                fingerprint: fingerprint(&plain),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = GenerateManifest { config: cfg.clone(), instances };
    write_json(&cfg.out_dir.join(format!("{}_manifest.json", cfg.prefix)), &manifest)?;
    Ok(manifest)
}
