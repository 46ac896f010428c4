use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{DeviceKind, DeviceProfile};

#[derive(Debug, Error, PartialEq)]
pub enum FleetError {
    #[error("fleet must contain at least one device profile")]
    EmptyFleet,
    #[error("duplicate device name {0:?}")]
    DuplicateName(String),
}

/// A validated set of device profiles.
///
/// Names are unique. When CPU pools are present, the first one is flagged as
/// the offload target; running a single CPU pool per machine keeps offload
/// latency predictable, so additional CPU pools are carried but not offloaded
/// to by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fleet {
    profiles: Vec<DeviceProfile>,
    offload_cpu: Option<usize>,
    primary_accelerator: Option<usize>,
}

impl Fleet {
    pub fn profiles(&self) -> &[DeviceProfile] {
        &self.profiles
    }

    /// The priority device: the first accelerator when present, otherwise the
    /// first profile.
    pub fn primary(&self) -> &DeviceProfile {
        match self.primary_accelerator {
            Some(i) => &self.profiles[i],
            None => &self.profiles[0],
        }
    }

    pub fn accelerator(&self) -> Option<&DeviceProfile> {
        self.primary_accelerator.map(|i| &self.profiles[i])
    }

    /// The CPU pool flagged as offload target, if any.
    pub fn offload_cpu(&self) -> Option<&DeviceProfile> {
        self.offload_cpu.map(|i| &self.profiles[i])
    }

    pub fn has_kind(&self, kind: DeviceKind) -> bool {
        self.profiles.iter().any(|p| p.kind == kind)
    }

    pub fn has_both_kinds(&self) -> bool {
        self.has_kind(DeviceKind::Accelerator) && self.has_kind(DeviceKind::Cpu)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Validates profiles into a [`Fleet`]: non-empty, unique names, first
/// accelerator marked primary, first CPU marked offload target.
pub fn validate_fleet(profiles: Vec<DeviceProfile>) -> Result<Fleet, FleetError> {
    if profiles.is_empty() {
        return Err(FleetError::EmptyFleet);
    }
    for (i, p) in profiles.iter().enumerate() {
        if profiles[..i].iter().any(|q| q.name == p.name) {
            return Err(FleetError::DuplicateName(p.name.clone()));
        }
    }
    let primary_accelerator = profiles.iter().position(|p| p.kind == DeviceKind::Accelerator);
    let offload_cpu = profiles.iter().position(|p| p.kind == DeviceKind::Cpu);
    Ok(Fleet {
        profiles,
        offload_cpu,
        primary_accelerator,
    })
}
