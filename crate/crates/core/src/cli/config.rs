//! Run configuration file (TOML). Unknown keys are rejected and the schema
//! version must match.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//! output_dir = "runs/ghz"
//!
//! [[family]]
//! kind = "ghz"
//! n_qubits = 4
//!
//! [target]
//! trash = 3
//!
//! [ea]
//! max_generations = 200
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compressor::{OrderStrategy, DEFAULT_BACKTRACKS};
use crate::error::{Error, Result};
use crate::evolution::EAParams;
use crate::families::FamilySpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the configured master seed.
pub const SEED_ENV: &str = "REVCOMP_SEED";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetOverride {
    /// Number of leading qubits to clear.
    pub trash: Option<usize>,
    /// Explicit trash qubits, cleared in this order.
    pub trash_qubits: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, rename = "family")]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub target: TargetOverride,
    #[serde(default)]
    pub ea: EAParams,
    #[serde(default)]
    pub order: OrderStrategy,
    #[serde(default = "default_backtracks")]
    pub backtracks: usize,
    pub output_dir: Option<PathBuf>,
    /// Master seed. Falls back to `ea.seed` when absent.
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub verbosity: u8,
}

fn one() -> usize {
    1
}

fn default_backtracks() -> usize {
    DEFAULT_BACKTRACKS
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            families: Vec::new(),
            target: TargetOverride::default(),
            ea: EAParams::default(),
            order: OrderStrategy::Fixed,
            backtracks: DEFAULT_BACKTRACKS,
            output_dir: None,
            seed: None,
            repetitions: 1,
            verbosity: 0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `REVCOMP_SEED` if it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
            self.seed = Some(seed);
        }
        Ok(())
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(self.ea.seed)
    }

    /// Checks every family, the search parameters and the target override.
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("no family given".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        if self.target.trash.is_some() && self.target.trash_qubits.is_some() {
            return Err(Error::Config("give either trash or trash_qubits, not both".into()));
        }
        for f in &self.families {
            f.validate()?;
        }
        self.ea.validate()
    }
}
