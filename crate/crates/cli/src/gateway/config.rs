use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

/// How admitted batches are turned into latency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkerMode {
    /// Price each batch on the device's latency line and sleep the scaled
    /// amount. Requires an explicit seed.
    Simulated,
    /// Shell out to `external_command` once per batch; the measured wall time
    /// is the batch latency.
    External,
}

fn default_listen() -> String {
    "127.0.0.1:8080".to_string()
}

fn default_time_scale() -> f64 {
    1.0
}

fn default_flush_interval() -> f64 {
    5.0
}

/// Gateway configuration file (TOML).
///
/// `PEAKQ_LISTEN` overrides the listen address and `PEAKQ_LOG` the log
/// filter at startup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    /// Path to the fleet config (devices, SLO, optional [plan]).
    pub fleet_config: PathBuf,
    /// Request overflow routing to the CPU queue.
    #[serde(default)]
    pub heterogeneous: bool,
    /// Seed for simulated workers. Mandatory in simulated mode so every run
    /// is replayable.
    pub seed: Option<u64>,
    #[serde(default = "default_worker_mode")]
    pub worker_mode: WorkerMode,
    /// Real seconds slept per virtual second of simulated latency.
    #[serde(default = "default_time_scale")]
    pub time_scale: f64,
    /// Command run per batch in external mode.
    #[serde(default)]
    pub external_command: Vec<String>,
    /// JSON-lines admission log destination.
    #[serde(default)]
    pub request_log: Option<PathBuf>,
    #[serde(default = "default_flush_interval")]
    pub metrics_flush_interval_s: f64,
}

fn default_worker_mode() -> WorkerMode {
    WorkerMode::Simulated
}

impl GatewayConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: GatewayConfig = toml::from_str(text).context("parsing gateway config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut config = Self::from_toml(&text)?;
        // Resolve the fleet path relative to the gateway config file.
        if config.fleet_config.is_relative() {
            if let Some(dir) = path.parent() {
                config.fleet_config = dir.join(&config.fleet_config);
            }
        }
        if let Ok(listen) = std::env::var("PEAKQ_LISTEN") {
            config.listen = listen;
        }
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.worker_mode == WorkerMode::Simulated && self.seed.is_none() {
            bail!("simulated worker mode requires an explicit `seed` so runs are replayable");
        }
        if self.worker_mode == WorkerMode::External && self.external_command.is_empty() {
            bail!("external worker mode requires `external_command`");
        }
        if !(self.time_scale.is_finite() && self.time_scale >= 0.0) {
            bail!("time_scale must be finite and >= 0");
        }
        if !(self.metrics_flush_interval_s.is_finite() && self.metrics_flush_interval_s > 0.0) {
            bail!("metrics_flush_interval_s must be > 0");
        }
        Ok(())
    }
}
