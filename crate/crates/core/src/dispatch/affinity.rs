use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AffinityError {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
}

/// Offload cores within one NUMA node, highest index first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreGroup {
    pub numa: usize,
    pub cores: Vec<usize>,
}

/// Core affinity recommendation for CPU offload workers.
///
/// Advisory output only; binding the workers is the deployer's job.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinityPlan {
    pub reserved: Vec<usize>,
    pub groups: Vec<CoreGroup>,
}

impl AffinityPlan {
    /// All offload cores in recommendation order (descending index).
    pub fn flatten(&self) -> Vec<usize> {
        self.groups.iter().flat_map(|g| g.cores.iter().copied()).collect()
    }
}

/// Recommends cores for offload workers: reserve the
/// `floor(reserve_fraction * total_cores)` lowest-index cores for the service
/// framework and accelerator feeding, then hand out the rest in descending
/// index order, grouped by NUMA node so no contiguous worker block crosses a
/// node boundary.
///
/// High indices first because the framework lands on the low ones by default;
/// NUMA grouping because cross-node memory access costs real latency.
pub fn recommend_affinity(
    total_cores: usize,
    numa_count: usize,
    reserve_fraction: f64,
) -> Result<AffinityPlan, AffinityError> {
    if total_cores == 0 || numa_count == 0 {
        return Err(AffinityError::InvalidTopology(
            "total_cores and numa_count must be >= 1".into(),
        ));
    }
    if !total_cores.is_multiple_of(numa_count) {
        return Err(AffinityError::InvalidTopology(format!(
            "{total_cores} cores do not divide evenly into {numa_count} NUMA nodes"
        )));
    }
    if !(0.0..1.0).contains(&reserve_fraction) {
        return Err(AffinityError::InvalidTopology(format!(
            "reserve_fraction must be in [0, 1), got {reserve_fraction}"
        )));
    }
    let per_numa = total_cores / numa_count;
    let reserved_count = (reserve_fraction * total_cores as f64).floor() as usize;

    let mut groups: Vec<CoreGroup> = Vec::new();
    for core in (reserved_count..total_cores).rev() {
        let numa = core / per_numa;
        match groups.last_mut() {
            Some(g) if g.numa == numa => g.cores.push(core),
            _ => groups.push(CoreGroup {
                numa,
                cores: vec![core],
            }),
        }
    }
    Ok(AffinityPlan {
        reserved: (0..reserved_count).collect(),
        groups,
    })
}
