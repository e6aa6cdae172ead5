//! Versioned experiment files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "experiment": {
//!     "sampler": { "domain": { "kind": "torus", "dim": 1 }, "n": 8, "pattern": { "kind": "iid-uniform" } },
//!     "integrand": { "kind": "cos" },
//!     "truncation": { "kind": "bandwidth", "bandwidth": 3 },
//!     "realizations": 100000,
//!     "seed": 1
//!   }
//! }
//! ```
//!
//! Relative paths inside the file resolve against the file's directory.

use crate::error::{Error, Result};
use crate::harness::ExperimentConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    pub experiment: ExperimentConfig,
    /// Precomputed sampler spectrum (JSON) for `predict`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler_spectrum: Option<PathBuf>,
    /// Fixed point file for `spectrum`, used instead of drawing from the sampler.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern_file: Option<PathBuf>,
}

impl ConfigFile {
    pub fn new(experiment: ExperimentConfig) -> Self {
        Self { version: SCHEMA_VERSION, experiment, sampler_spectrum: None, pattern_file: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        if config.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                config.version
            )));
        }
        config.experiment.validate()?;
        Ok(config)
    }

    /// Reads, validates and makes embedded paths absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.sampler_spectrum, &mut config.pattern_file].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
