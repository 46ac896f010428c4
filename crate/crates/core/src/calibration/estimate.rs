use serde::{Deserialize, Serialize};

use crate::domain::{meets_slo, Fleet, LatencyModel, QueuePlan, Slo};

/// Depth returned for a device whose latency line is flat (`alpha == 0`)
/// under the SLO: the true bound is infinite, so the estimate is capped.
pub const UNBOUNDED_DEPTH_CAP: u32 = 4096;

/// An SLO-feasible maximum concurrency for one device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcurrencyEstimate {
    /// Largest concurrency whose predicted latency meets the SLO; 0 when even
    /// a single query overruns it.
    pub depth: u32,
    /// Set when the line is flat under the SLO and `depth` is the cap rather
    /// than a real bound.
    pub unbounded: bool,
}

/// Largest integer `C >= 0` with `alpha * C + beta <= T` and
/// `alpha * (C + 1) + beta > T`.
///
/// Returns 0 when even `C = 1` violates the SLO (the device cannot be used
/// for admission at all) and the configured cap with `unbounded` set when
/// `alpha == 0` and `beta <= T`.
pub fn estimate_max_concurrency(model: &LatencyModel, slo: Slo) -> ConcurrencyEstimate {
    if !meets_slo(model.predict(1), slo) {
        return ConcurrencyEstimate {
            depth: 0,
            unbounded: false,
        };
    }
    if model.alpha == 0.0 {
        return ConcurrencyEstimate {
            depth: UNBOUNDED_DEPTH_CAP,
            unbounded: true,
        };
    }
    // Closed-form seed, then fix up so both threshold inequalities hold in
    // the arithmetic actually used by `predict` (the division can land one
    // step off when the line touches the bound exactly).
    let mut depth = ((slo.max_latency_s - model.beta) / model.alpha).floor().max(1.0) as u32;
    while depth > 1 && !meets_slo(model.predict(depth), slo) {
        depth -= 1;
    }
    while meets_slo(model.predict(depth + 1), slo) {
        depth += 1;
        if depth >= UNBOUNDED_DEPTH_CAP {
            break;
        }
    }
    ConcurrencyEstimate {
        depth,
        unbounded: false,
    }
}

/// Builds a queue plan for a fleet from per-device estimates.
///
/// With both kinds present and `heterogeneous` requested, the accelerator and
/// offload-CPU depths come from their respective lines. A single-kind fleet
/// gets a single-queue plan (its depth carried in `accelerator_depth`).
pub fn plan_for_fleet(fleet: &Fleet, slo: Slo, heterogeneous: bool) -> QueuePlan {
    match (fleet.accelerator(), fleet.offload_cpu()) {
        (Some(accel), Some(cpu)) if heterogeneous => QueuePlan {
            accelerator_depth: estimate_max_concurrency(&accel.latency, slo).depth,
            cpu_depth: estimate_max_concurrency(&cpu.latency, slo).depth,
            heterogeneous_enabled: true,
        },
        (Some(accel), _) => {
            QueuePlan::single(estimate_max_concurrency(&accel.latency, slo).depth)
        }
        (None, _) => {
            QueuePlan::single(estimate_max_concurrency(&fleet.primary().latency, slo).depth)
        }
    }
}
