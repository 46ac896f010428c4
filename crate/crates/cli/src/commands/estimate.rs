use std::path::PathBuf;

use clap::Args;
use peakq_core::calibration::estimate_max_concurrency;
use peakq_core::domain::{LatencyModel, Slo};

use super::emit;

#[derive(Args)]
pub struct EstimateArgs {
    /// Seconds per concurrent query.
    #[arg(long)]
    alpha: f64,
    /// Fixed seconds independent of concurrency.
    #[arg(long)]
    beta: f64,
    /// SLO bound in seconds.
    #[arg(long)]
    slo: f64,
    /// Emit the full estimate as JSON instead of the bare depth.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: EstimateArgs) -> anyhow::Result<()> {
    let model = LatencyModel::new(args.alpha, args.beta)?;
    let slo = Slo::new(args.slo)?;
    let estimate = estimate_max_concurrency(&model, slo);
    if estimate.unbounded {
        eprintln!(
            "warning: flat latency line; depth capped at {}",
            estimate.depth
        );
    }
    let text = if args.json {
        super::to_pretty_json(&estimate)?
    } else {
        estimate.depth.to_string()
    };
    emit(args.out.as_ref(), &text)
}
