use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_fleet, Fleet, QueuePlan, Slo};
use crate::sim::{simulate, WorkloadSpec};

#[derive(Debug, Error, PartialEq)]
pub enum TuneError {
    #[error("no depth combination within the search radius met the SLO")]
    NoFeasiblePlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FineTuneOptions {
    /// Half-width of the per-device search grid around the initial depths.
    pub search_radius: u32,
    /// Latency shift applied to every device while devices run
    /// collaboratively, in seconds. Negative values model a deployment whose
    /// standalone profiling overstated the collaborative latency; positive
    /// values model added contention. Applied to the fixed term of each line.
    pub collaborative_overhead_s: f64,
    /// Closed-loop rounds per candidate evaluation.
    pub batches: u32,
    /// Seed for the candidate simulations.
    pub seed: u64,
}

impl Default for FineTuneOptions {
    fn default() -> Self {
        Self {
            search_radius: 4,
            collaborative_overhead_s: 0.0,
            batches: 3,
            seed: 0x7e5d,
        }
    }
}

/// Refines an estimated queue plan by simulating the devices collaboratively
/// over the grid `[depth - radius, depth + radius]` per device and keeping
/// the feasible plan with the largest combined depth.
///
/// Feasible means zero SLO violations with every queue saturated. Ties break
/// toward the larger accelerator depth (its marginal latency is lower), then
/// the smaller CPU depth.
pub fn fine_tune_depths(
    initial: QueuePlan,
    fleet: &Fleet,
    slo: Slo,
    search_radius: u32,
) -> Result<QueuePlan, TuneError> {
    fine_tune_depths_with(
        initial,
        fleet,
        slo,
        FineTuneOptions {
            search_radius,
            ..FineTuneOptions::default()
        },
    )
}

fn shifted_fleet(fleet: &Fleet, overhead_s: f64) -> Fleet {
    if overhead_s == 0.0 {
        return fleet.clone();
    }
    let profiles = fleet
        .profiles()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.latency.beta = (p.latency.beta + overhead_s).max(0.0);
            p
        })
        .collect();
    validate_fleet(profiles).expect("shifting betas preserves validity")
}

pub fn fine_tune_depths_with(
    initial: QueuePlan,
    fleet: &Fleet,
    slo: Slo,
    options: FineTuneOptions,
) -> Result<QueuePlan, TuneError> {
    if options.search_radius == 0 {
        return Ok(initial);
    }
    let sim_fleet = shifted_fleet(fleet, options.collaborative_overhead_s);
    let radius = options.search_radius;
    let tune_cpu = initial.heterogeneous_enabled && sim_fleet.has_both_kinds();

    let accel_range =
        initial.accelerator_depth.saturating_sub(radius)..=initial.accelerator_depth + radius;
    let cpu_range = if tune_cpu {
        initial.cpu_depth.saturating_sub(radius)..=initial.cpu_depth + radius
    } else {
        initial.cpu_depth..=initial.cpu_depth
    };

    let mut best: Option<QueuePlan> = None;
    for accel_depth in accel_range {
        for cpu_depth in cpu_range.clone() {
            let candidate = QueuePlan {
                accelerator_depth: accel_depth,
                cpu_depth,
                heterogeneous_enabled: initial.heterogeneous_enabled,
            };
            let saturation = candidate.total_depth();
            let feasible = if saturation == 0 {
                true
            } else {
                let workload = WorkloadSpec::closed_loop(saturation, options.batches, options.seed);
                simulate(&sim_fleet, candidate, &workload, slo).slo_violations == 0
            };
            if !feasible {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let (cand, cur) = (candidate.total_depth(), b.total_depth());
                    cand > cur
                        || (cand == cur && candidate.accelerator_depth > b.accelerator_depth)
                        || (cand == cur
                            && candidate.accelerator_depth == b.accelerator_depth
                            && candidate.cpu_depth < b.cpu_depth)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(TuneError::NoFeasiblePlan)
}
