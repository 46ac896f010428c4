//! Latency-line calibration and SLO-feasible depth estimation.
//!
//! The workflow: profile a device at a handful of concurrency levels
//! ([`measure`] via any [`DeviceProbe`]), fit the affine latency line
//! ([`fit_latency_model`]), derive the largest depth that still meets the
//! SLO ([`estimate_max_concurrency`]), and optionally refine the combined
//! plan with collaborative simulation ([`fine_tune_depths`]).

mod estimate;
mod fit;
mod stress;
mod tune;

pub use estimate::{
    estimate_max_concurrency, plan_for_fleet, ConcurrencyEstimate, UNBOUNDED_DEPTH_CAP,
};
pub use fit::{
    fit_latency_model, samples_from_csv, samples_from_csv_path, FitError, FitResult,
    ProfilingSample,
};
pub use stress::{
    calibrate_device, profiling_schedule, run_stress_test, run_stress_test_with, DeviceProbe,
    StressError, StressOptions, StressReport, DEFAULT_SUBMIT_OVERHEAD_S,
};
pub use tune::{fine_tune_depths, fine_tune_depths_with, FineTuneOptions, TuneError};
