//! SLO-bounded admission control for heterogeneous accelerator/CPU serving.
//!
//! The crate is organized around the lifecycle of a capacity-planned
//! embedding-style service:
//!
//! - [`domain`]: shared value types (device profiles, latency models, queue
//!   plans, SLOs) and the fleet config format.
//! - [`calibration`]: fits the latency-vs-concurrency line for a device,
//!   derives the largest SLO-safe queue depth, and refines depths with
//!   collaborative simulation.
//! - [`dispatch`]: bounded admission queues with accelerator-first routing,
//!   busy rejection, and the NUMA-aware core affinity recommender.
//! - [`cost`]: deployment cost under average-rate and peak-rate sizing, plus
//!   the savings/throughput gains from CPU offload.
//! - [`sim`]: a deterministic discrete-event simulator used as the test bench
//!   for everything above.

pub mod calibration;
pub mod cost;
pub mod dispatch;
pub mod domain;
pub mod sim;

pub use domain::{
    DeviceKind, DeviceProfile, Fleet, LatencyModel, Placement, Query, QueuePlan, SimMetrics, Slo,
};
