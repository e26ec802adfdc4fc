//! Analysis configuration, read from JSON.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::DEFAULT_REL_TOL;
use crate::invariance::DEFAULT_N_MAX;
use crate::oracle::DEFAULT_ORACLE_TOL;
use crate::spectrum::{FrequencyGrid, GeneratorSpec};

pub const DEFAULT_SAMPLES_PER_UNIT: usize = 256;
pub const DEFAULT_FIBER_HALF_WIDTH: usize = 16;

fn default_grid() -> FrequencyGrid {
    FrequencyGrid::new(DEFAULT_SAMPLES_PER_UNIT, DEFAULT_FIBER_HALF_WIDTH).expect("default grid is valid")
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

fn default_oracle_tol() -> f64 {
    DEFAULT_ORACLE_TOL
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    #[serde(default = "yes")]
    pub order: bool,
    #[serde(default = "yes")]
    pub frames: bool,
    #[serde(default = "yes")]
    pub support_bounds: bool,
    #[serde(default = "yes")]
    pub oracle: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Self { order: true, frames: true, support_bounds: true, oracle: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub generators: Vec<GeneratorSpec>,
    #[serde(default = "default_grid")]
    pub grid: FrequencyGrid,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub analyses: Analyses,
}

impl AnalysisConfig {
    pub fn new(generators: Vec<GeneratorSpec>) -> Self {
        Self {
            generators,
            grid: default_grid(),
            n_max: DEFAULT_N_MAX,
            rel_tol: DEFAULT_REL_TOL,
            oracle_tol: DEFAULT_ORACLE_TOL,
            outputs: Outputs::default(),
            analyses: Analyses::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Config("generators: at least one generator is required".into()));
        }
        if self.n_max < 2 {
            return Err(Error::Config(format!("n_max must be ≥ 2, got {}", self.n_max)));
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("oracle_tol", self.oracle_tol)] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {tol}")));
            }
        }
        for (i, g) in self.generators.iter().enumerate() {
            g.validate().map_err(|e| Error::Config(format!("generators[{i}]: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parse and validate a JSON configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: AnalysisConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("{path}: {inner}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}
