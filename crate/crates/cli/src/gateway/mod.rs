//! Request-serving gateway: an HTTP front over the admission dispatcher with
//! real concurrency, pluggable worker backends, and counters shaped like the
//! simulator's metrics.

mod config;
mod routes;
mod state;
mod worker;

pub use config::{GatewayConfig, WorkerMode};
pub use routes::{build_router, EmbedRequest, EmbedResponse};
pub use state::{spawn_workers, EmbedOutcome, GatewayState, PoolHandle};
pub use worker::{ExternalCommandBackend, Job, SimulatedBackend, WorkerBackend};
