//! Deterministic discrete-event simulation: synthetic devices that follow
//! their latency lines, closed-loop and diurnal open-loop workloads, and the
//! event engine that drives admission, batching, and completion in virtual
//! time. Runs from the experiments replay in milliseconds of wall time.

mod device;
mod engine;
mod workload;

pub use device::{cpu_alpha_for_cores, measure_latency_curve, SimulatedDevice};
pub use engine::simulate;
pub use workload::{diurnal_rate_at, generate_diurnal, DiurnalSpec, WorkloadMode, WorkloadSpec};
