use std::path::PathBuf;

use anyhow::bail;
use clap::Args;
use peakq_core::calibration::{
    calibrate_device, fit_latency_model, samples_from_csv_path, FitResult,
};
use peakq_core::domain::{LatencyModel, Slo};
use peakq_core::sim::SimulatedDevice;
use serde_json::json;

use super::emit;

#[derive(Args)]
pub struct CalibrateArgs {
    /// Profiling CSV with header `concurrency,latency_s`.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    csv: Option<PathBuf>,
    /// Synthetic device slope (use with --beta to profile a simulated device).
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    /// Synthetic device intercept.
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
    /// Jitter stddev for the synthetic device.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Seed for the synthetic device.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of probe batches stretched to 3x latency (outlier injection).
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    /// SLO used to place the profiling schedule (synthetic mode).
    #[arg(long, default_value_t = 1.0)]
    slo: f64,
    /// Profiling sessions in the schedule (synthetic mode).
    #[arg(long, default_value_t = 6)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: CalibrateArgs) -> anyhow::Result<()> {
    let fit: FitResult = match (&args.csv, args.alpha, args.beta) {
        (Some(path), _, _) => {
            let samples = samples_from_csv_path(path)?;
            fit_latency_model(&samples)?
        }
        (None, Some(alpha), Some(beta)) => {
            let mut device = SimulatedDevice::from_line(
                LatencyModel::new(alpha, beta)?,
                args.noise,
                args.seed,
            )
            .with_outliers(args.outliers);
            calibrate_device(&mut device, Slo::new(args.slo)?, args.points)?
        }
        _ => bail!("provide either --csv or both --alpha and --beta"),
    };
    if fit.clamped {
        eprintln!("warning: a negative fitted coefficient was clamped to 0");
    }
    let doc = json!({
        "alpha": fit.model.alpha,
        "beta": fit.model.beta,
        "r_squared": fit.r_squared,
        "n": fit.sample_count,
    });
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&doc)?)
}
