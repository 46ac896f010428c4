//! Fleet config file: a TOML document with one `[[device]]` table per worker
//! pool, a `[slo]` section, and an optional explicit `[plan]`.
//!
//! ```toml
//! [[device]]
//! name = "v100-gpu"
//! kind = "accelerator"     # or "cpu"
//! alpha = 0.018            # seconds per concurrent query
//! beta = 0.27              # fixed seconds
//! worker_count = 1
//! noise_stddev = 0.0
//!
//! [slo]
//! max_latency_s = 1.0
//!
//! [plan]                   # optional; omitted = derive from the device lines
//! accelerator_depth = 40
//! cpu_depth = 8
//! heterogeneous = true
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fleet::{validate_fleet, Fleet, FleetError};
use super::types::{DeviceKind, DeviceProfile, DomainError, LatencyModel, QueuePlan, Slo};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value: {0}")]
    Value(#[from] DomainError),
    #[error("invalid fleet: {0}")]
    Fleet(#[from] FleetError),
}

fn default_worker_count() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DeviceSection {
    name: String,
    kind: DeviceKind,
    alpha: f64,
    beta: f64,
    #[serde(default = "default_worker_count")]
    worker_count: u32,
    #[serde(default)]
    noise_stddev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SloSection {
    max_latency_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSection {
    pub accelerator_depth: u32,
    #[serde(default)]
    pub cpu_depth: u32,
    #[serde(default)]
    pub heterogeneous: bool,
}

/// Parsed and validated fleet config.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetFile {
    pub fleet: Fleet,
    pub slo: Slo,
    pub plan: Option<QueuePlan>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawFleetFile {
    #[serde(rename = "device")]
    devices: Vec<DeviceSection>,
    slo: SloSection,
    plan: Option<PlanSection>,
}

impl FleetFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawFleetFile = toml::from_str(text)?;
        let mut profiles = Vec::with_capacity(raw.devices.len());
        for d in raw.devices {
            profiles.push(DeviceProfile::new(
                d.name,
                d.kind,
                LatencyModel::new(d.alpha, d.beta)?,
                d.worker_count,
                d.noise_stddev,
            )?);
        }
        let fleet = validate_fleet(profiles)?;
        let slo = Slo::new(raw.slo.max_latency_s)?;
        let plan = match raw.plan {
            Some(p) => Some(QueuePlan::new(p.accelerator_depth, p.cpu_depth, p.heterogeneous)?),
            None => None,
        };
        Ok(FleetFile { fleet, slo, plan })
    }

    pub fn to_toml(&self) -> String {
        let raw = RawFleetFile {
            devices: self
                .fleet
                .profiles()
                .iter()
                .map(|p| DeviceSection {
                    name: p.name.clone(),
                    kind: p.kind,
                    alpha: p.latency.alpha,
                    beta: p.latency.beta,
                    worker_count: p.worker_count,
                    noise_stddev: p.noise_stddev,
                })
                .collect(),
            slo: SloSection {
                max_latency_s: self.slo.max_latency_s,
            },
            plan: self.plan.map(|p| PlanSection {
                accelerator_depth: p.accelerator_depth,
                cpu_depth: p.cpu_depth,
                heterogeneous: p.heterogeneous_enabled,
            }),
        };
        toml::to_string_pretty(&raw).expect("fleet file serializes")
    }
}
