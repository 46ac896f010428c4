//! Shared domain types: construction, validation, and serialization.
//!
//! Everything here is an immutable value object, safe to share and send
//! between threads. Behavior lives in the other modules.

mod config;
mod fleet;
mod types;

pub use config::{ConfigError, FleetFile, PlanSection};
pub use fleet::{validate_fleet, Fleet, FleetError};
pub use types::{
    decomposed_to_model, CostInputs, DecomposedLatency, DeviceKind, DeviceProfile, DomainError,
    LatencyModel, Placement, Query, QueuePlan, SimMetrics, Slo,
};

/// Slack applied when judging SLO compliance (`latency <= T + SLO_TOLERANCE_S`).
///
/// One nanosecond: far below any realistic timing precision, but enough to
/// absorb f64 rounding when a device line lands exactly on the SLO boundary
/// (e.g. 0.084 * 20 + 0.32 vs 2.0).
pub const SLO_TOLERANCE_S: f64 = 1e-9;

/// True when a latency meets the SLO bound.
pub fn meets_slo(latency_s: f64, slo: Slo) -> bool {
    latency_s <= slo.max_latency_s + SLO_TOLERANCE_S
}
