//! Run configuration loaded from a JSON file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use btb_core::{MarketParams, PopulationParams, SweepSpec, DEFAULT_EPS};

/// Oracle settings: grid resolution, Monte Carlo size, seed, and tolerance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub grid_n: usize,
    pub n_samples: u64,
    pub seed: u64,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { grid_n: 401, n_samples: 1_000_000, seed: 42, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub format: Option<String>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub market: MarketParams,
    #[serde(default)]
    pub population: Option<PopulationParams>,
    /// Single-group qualification potential; defaults to `population.p1`.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("reading config {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("parsing config {}: {e}", path.display()))?;
        Ok(config)
    }
}
