//! TOML run configuration. Keys mirror the command-line flags; flags win.
//!
//! ```toml
//! order = 16
//! h = 1e-4
//! samples = 1000
//! seed = 7
//! format = "json"
//! out = "report.json"
//!
//! [tolerances]
//! figure-eight = 1e-4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenarios::Scenario;
use crate::error::{Result, TransportError};

pub const CONFIG_ENV: &str = "EVOLVE_TRANSPORT_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = TransportError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(TransportError::Config(format!(
                "unknown output format {other:?} (expected json or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub order: Option<usize>,
    /// Absolute finite-difference step; defaults to `1e-4 × window length`.
    pub h: Option<f64>,
    /// Residual tolerance applied to every scenario without its own entry.
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    /// Per-scenario residual tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| TransportError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TransportError::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Loads `explicit` if given, else the file named by the environment
    /// variable, else the empty config.
    pub fn discover(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
                _ => Ok(Config::default()),
            },
        }
    }

    fn check(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(TransportError::Config(format!("{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        positive("h", self.h)?;
        positive("tol", self.tol)?;
        for (name, tol) in &self.tolerances {
            positive(&format!("tolerances.{name}"), Some(*tol))?;
        }
        if self.order == Some(0) {
            return Err(TransportError::Config("order must be at least 1".into()));
        }
        if self.samples == Some(0) {
            return Err(TransportError::Config("samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies the tolerance override for `scenario`, if any.
    pub fn apply_tolerance(&self, scenario: &mut Scenario) {
        if let Some(t) = self.tolerances.get(&scenario.name).copied().or(self.tol) {
            scenario.tolerance_override = Some(t);
        }
    }
}
