use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validation failure when constructing a domain value.
#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("{field} must be finite and >= 0, got {value}")]
    NegativeOrNonFinite { field: &'static str, value: f64 },
    #[error("{field} must be > 0, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be >= 1, got {value}")]
    ZeroCount { field: &'static str, value: u64 },
    #[error("device name must be non-empty")]
    EmptyName,
    #[error("a plan with heterogeneous dispatch disabled must have cpu_depth = 0, got {0}")]
    CpuDepthWithoutHeterogeneous(u32),
}

fn require_non_negative(field: &'static str, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(DomainError::NegativeOrNonFinite { field, value })
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DomainError::NonPositive { field, value })
    }
}

/// The two classes of serving hardware. Accelerators (NPUs/GPUs) always take
/// dispatch priority over CPUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Accelerator,
    Cpu,
}

impl DeviceKind {
    pub fn is_accelerator(self) -> bool {
        matches!(self, DeviceKind::Accelerator)
    }
}

/// Affine latency-vs-concurrency model: predicted processing latency at
/// concurrency `C` is `alpha * C + beta` seconds.
///
/// `alpha` captures per-query compute and I/O movement, `beta` the
/// concurrency-independent overhead (model loading). Both are non-negative,
/// so the prediction is non-decreasing in `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    /// Seconds added per concurrent query.
    pub alpha: f64,
    /// Fixed seconds independent of concurrency.
    pub beta: f64,
}

impl LatencyModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, DomainError> {
        Ok(Self {
            alpha: require_non_negative("alpha", alpha)?,
            beta: require_non_negative("beta", beta)?,
        })
    }

    /// Predicted latency at an integer concurrency level.
    pub fn predict(&self, concurrency: u32) -> f64 {
        self.predict_f(concurrency as f64)
    }

    /// Predicted latency at a continuous concurrency level.
    pub fn predict_f(&self, concurrency: f64) -> f64 {
        self.alpha * concurrency + self.beta
    }

    /// Largest continuous concurrency with predicted latency within `budget_s`.
    /// Returns `None` when `alpha == 0` (unbounded) or the budget is below `beta`.
    pub fn concurrency_at(&self, budget_s: f64) -> Option<f64> {
        if self.alpha == 0.0 || budget_s < self.beta {
            None
        } else {
            Some((budget_s - self.beta) / self.alpha)
        }
    }
}

/// Latency decomposition into per-concurrency compute and I/O terms plus a
/// fixed model-load term. Collapses onto a [`LatencyModel`] with
/// `alpha = compute + io` and `beta = model_load`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecomposedLatency {
    /// Compute seconds contributed per unit concurrency.
    pub compute_per_query: f64,
    /// Input/output movement seconds per unit concurrency.
    pub io_per_query: f64,
    /// Fixed model-loading seconds.
    pub model_load_fixed: f64,
}

impl DecomposedLatency {
    pub fn new(
        compute_per_query: f64,
        io_per_query: f64,
        model_load_fixed: f64,
    ) -> Result<Self, DomainError> {
        Ok(Self {
            compute_per_query: require_non_negative("compute_per_query", compute_per_query)?,
            io_per_query: require_non_negative("io_per_query", io_per_query)?,
            model_load_fixed: require_non_negative("model_load_fixed", model_load_fixed)?,
        })
    }

    /// Collapse the decomposition into the affine model.
    pub fn to_model(&self) -> LatencyModel {
        LatencyModel {
            alpha: self.compute_per_query + self.io_per_query,
            beta: self.model_load_fixed,
        }
    }

    /// Field-wise sum of two decompositions.
    pub fn merge(&self, other: &DecomposedLatency) -> DecomposedLatency {
        DecomposedLatency {
            compute_per_query: self.compute_per_query + other.compute_per_query,
            io_per_query: self.io_per_query + other.io_per_query,
            model_load_fixed: self.model_load_fixed + other.model_load_fixed,
        }
    }
}

/// Collapse a [`DecomposedLatency`] into its affine [`LatencyModel`].
pub fn decomposed_to_model(decomposed: &DecomposedLatency) -> LatencyModel {
    decomposed.to_model()
}

/// One worker pool: identity, hardware class, calibrated latency line, and
/// simulation jitter. `worker_count` multiplies service capacity in
/// simulation; the latency model describes the deployed worker set as a
/// whole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub kind: DeviceKind,
    pub latency: LatencyModel,
    pub worker_count: u32,
    /// Standard deviation of one-sided latency jitter in simulation;
    /// 0 makes the device exactly its latency line.
    pub noise_stddev: f64,
}

impl DeviceProfile {
    pub fn new(
        name: impl Into<String>,
        kind: DeviceKind,
        latency: LatencyModel,
        worker_count: u32,
        noise_stddev: f64,
    ) -> Result<Self, DomainError> {
        let name = name.into();
        if name.is_empty() {
            return Err(DomainError::EmptyName);
        }
        if worker_count == 0 {
            return Err(DomainError::ZeroCount {
                field: "worker_count",
                value: 0,
            });
        }
        Ok(Self {
            name,
            kind,
            latency,
            worker_count,
            noise_stddev: require_non_negative("noise_stddev", noise_stddev)?,
        })
    }
}

/// End-to-end latency bound (the `T` every depth decision is made against).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slo {
    pub max_latency_s: f64,
}

impl Slo {
    pub fn new(max_latency_s: f64) -> Result<Self, DomainError> {
        Ok(Self {
            max_latency_s: require_positive("max_latency_s", max_latency_s)?,
        })
    }
}

/// Per-device admission depths bound to an SLO.
///
/// `accelerator_depth` is the depth of the priority queue. When a deployment
/// has only one device kind, the single queue also takes its depth from this
/// field. `cpu_depth` is the overflow queue depth and must be 0 when
/// heterogeneous dispatch is disabled. A depth of 0 marks a device that
/// cannot meet the SLO even at concurrency 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueuePlan {
    pub accelerator_depth: u32,
    pub cpu_depth: u32,
    pub heterogeneous_enabled: bool,
}

impl QueuePlan {
    pub fn new(
        accelerator_depth: u32,
        cpu_depth: u32,
        heterogeneous_enabled: bool,
    ) -> Result<Self, DomainError> {
        if !heterogeneous_enabled && cpu_depth != 0 {
            return Err(DomainError::CpuDepthWithoutHeterogeneous(cpu_depth));
        }
        Ok(Self {
            accelerator_depth,
            cpu_depth,
            heterogeneous_enabled,
        })
    }

    /// Plan for a single-queue deployment (no overflow routing).
    pub fn single(depth: u32) -> Self {
        Self {
            accelerator_depth: depth,
            cpu_depth: 0,
            heterogeneous_enabled: false,
        }
    }

    pub fn total_depth(&self) -> u32 {
        self.accelerator_depth + self.cpu_depth
    }
}

/// One unit of work. Only the token length matters for timing; content never
/// enters the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub id: u64,
    pub token_length: u32,
    pub arrival_time_s: f64,
}

impl Query {
    pub fn new(id: u64, token_length: u32, arrival_time_s: f64) -> Result<Self, DomainError> {
        if token_length == 0 {
            return Err(DomainError::ZeroCount {
                field: "token_length",
                value: 0,
            });
        }
        Ok(Self {
            id,
            token_length,
            arrival_time_s: require_non_negative("arrival_time_s", arrival_time_s)?,
        })
    }
}

/// Outcome of an admission decision. `Busy` is a value, not an error: the
/// service declined the query because every eligible queue was full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Accelerator,
    Cpu,
    Busy,
}

impl Placement {
    pub fn is_admitted(self) -> bool {
        !matches!(self, Placement::Busy)
    }
}

/// Inputs for the deployment cost formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    /// Average query arrival rate (N, queries per second).
    pub queries_per_second: f64,
    /// Peak concurrent query count (N_peak).
    pub peak_queries: f64,
    /// Sustained throughput of one instance (queries per second).
    pub throughput: f64,
    /// System maximum concurrency (C).
    pub max_concurrency: u32,
    /// Devices per instance (D).
    pub devices_per_instance: u32,
    /// Price per device (P, currency units).
    pub price_per_device: f64,
    pub slo: Slo,
    /// Mean per-query processing time (t_proc, seconds).
    pub mean_processing_s: f64,
}

impl CostInputs {
    /// Validates signs and finiteness. Rate-like fields may be zero (a zero
    /// load prices to zero); structural fields must be positive.
    pub fn validate(&self) -> Result<(), DomainError> {
        require_non_negative("queries_per_second", self.queries_per_second)?;
        require_non_negative("peak_queries", self.peak_queries)?;
        require_non_negative("throughput", self.throughput)?;
        require_positive("price_per_device", self.price_per_device)?;
        require_positive("mean_processing_s", self.mean_processing_s)?;
        if self.devices_per_instance == 0 {
            return Err(DomainError::ZeroCount {
                field: "devices_per_instance",
                value: 0,
            });
        }
        Ok(())
    }
}

/// Aggregate outcome of a simulated (or served) run.
///
/// Invariants: `accepted + rejected_busy` equals total submissions and
/// `slo_violations <= accepted`. Latency percentiles are nearest-rank over
/// accepted queries; `throughput_qps` sums each device pool's completed
/// count divided by its active span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub accepted: u64,
    pub rejected_busy: u64,
    pub slo_violations: u64,
    /// Highest in-flight count observed per device, keyed by device name.
    pub max_observed_concurrency: BTreeMap<String, u32>,
    pub latency_p50_s: f64,
    pub latency_p99_s: f64,
    pub latency_max_s: f64,
    pub throughput_qps: f64,
}

impl SimMetrics {
    pub fn total_submitted(&self) -> u64 {
        self.accepted + self.rejected_busy
    }
}
