use std::path::PathBuf;

use clap::Args;
use peakq_core::calibration::{run_stress_test_with, StressOptions, DEFAULT_SUBMIT_OVERHEAD_S};
use peakq_core::domain::{LatencyModel, Slo};
use peakq_core::sim::SimulatedDevice;

use super::emit;

#[derive(Args)]
pub struct StressArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of batches stretched to 3x latency (outlier injection).
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    /// SLO bound in seconds.
    #[arg(long)]
    slo: f64,
    /// Concurrency increment between probes.
    #[arg(long, default_value_t = 8)]
    step: u32,
    /// Per-query submission cost of the probe harness, seconds.
    #[arg(long, default_value_t = DEFAULT_SUBMIT_OVERHEAD_S)]
    submit_overhead: f64,
    /// Write the full probe report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: StressArgs) -> anyhow::Result<()> {
    let mut device =
        SimulatedDevice::from_line(LatencyModel::new(args.alpha, args.beta)?, args.noise, args.seed)
            .with_outliers(args.outliers);
    let report = run_stress_test_with(
        &mut device,
        Slo::new(args.slo)?,
        StressOptions {
            step: args.step,
            submit_overhead_s: args.submit_overhead,
            ..StressOptions::with_step(args.step)
        },
    )?;
    if report.capped {
        eprintln!("warning: ladder capped at {} without a failing probe", report.depth);
    }
    if let Some(out) = &args.out {
        emit(Some(out), &super::to_pretty_json(&report)?)?;
    }
    println!("{}", report.depth);
    Ok(())
}
