use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use peakq_core::calibration::plan_for_fleet;
use peakq_core::sim::{simulate, WorkloadSpec};

use super::{emit, load_fleet_file};

#[derive(Args)]
pub struct SimulateArgs {
    /// Fleet config (devices, SLO, optional [plan]).
    #[arg(long)]
    config: PathBuf,
    /// Workload spec (TOML).
    #[arg(long)]
    workload: PathBuf,
    /// Overrides the workload file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Metrics JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: SimulateArgs) -> anyhow::Result<()> {
    let file = load_fleet_file(&args.config)?;
    let text = std::fs::read_to_string(&args.workload)
        .with_context(|| format!("reading {}", args.workload.display()))?;
    let mut workload =
        WorkloadSpec::from_toml(&text).with_context(|| format!("parsing {}", args.workload.display()))?;
    if let Some(seed) = args.seed {
        workload.seed = seed;
    }
    let plan = file
        .plan
        .unwrap_or_else(|| plan_for_fleet(&file.fleet, file.slo, file.fleet.has_both_kinds()));
    let metrics = simulate(&file.fleet, plan, &workload, file.slo);
    eprintln!(
        "accepted {} rejected {} violations {} p99 {:.4}s throughput {:.2} q/s",
        metrics.accepted,
        metrics.rejected_busy,
        metrics.slo_violations,
        metrics.latency_p99_s,
        metrics.throughput_qps
    );
    emit(args.out.as_ref(), &super::to_pretty_json(&metrics)?)
}
