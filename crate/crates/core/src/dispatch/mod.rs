//! Bounded admission queues with accelerator-first routing.
//!
//! A queue's "depth" is an admission counter over in-flight queries, not a
//! buffered FIFO: the depth is the device's SLO-safe concurrency bound, and
//! letting queries wait beyond it would break the latency model the bound was
//! derived from. Admission is a single atomic compare-and-increment, so the
//! counters never overshoot their limits under any interleaving.

mod affinity;
mod log;
mod queues;

pub use affinity::{recommend_affinity, AffinityError, AffinityPlan, CoreGroup};
pub use log::{DecisionRecord, DispatchDecisionLog};
pub use queues::{detect_and_plan, dispatch, release, DeviceQueue, DispatchError, QueueSet};
