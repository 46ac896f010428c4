use std::path::PathBuf;

use clap::Args;
use peakq_core::calibration::{fine_tune_depths_with, plan_for_fleet, FineTuneOptions};
use peakq_core::domain::QueuePlan;

use super::{emit, load_fleet_file};

#[derive(Args)]
pub struct FinetuneArgs {
    /// Fleet config (devices + SLO; its [plan] section seeds the search when
    /// no explicit initial depths are given).
    #[arg(long)]
    config: PathBuf,
    /// Initial accelerator depth; defaults to the estimate from the device line.
    #[arg(long)]
    initial_accel: Option<u32>,
    /// Initial CPU depth; defaults to the estimate from the device line.
    #[arg(long)]
    initial_cpu: Option<u32>,
    /// Search half-width around the initial depths.
    #[arg(long, default_value_t = 4)]
    radius: u32,
    /// Collaborative latency shift in seconds (may be negative).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    overhead: f64,
    /// Closed-loop rounds per candidate.
    #[arg(long, default_value_t = 3)]
    batches: u32,
    #[arg(long, default_value_t = 0x7e5d)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: FinetuneArgs) -> anyhow::Result<()> {
    let file = load_fleet_file(&args.config)?;
    let heterogeneous = file.fleet.has_both_kinds();
    let mut initial = file
        .plan
        .unwrap_or_else(|| plan_for_fleet(&file.fleet, file.slo, heterogeneous));
    if let Some(accel) = args.initial_accel {
        initial.accelerator_depth = accel;
    }
    if let Some(cpu) = args.initial_cpu {
        initial = QueuePlan::new(initial.accelerator_depth, cpu, cpu > 0 || initial.heterogeneous_enabled)?;
    }
    let tuned = fine_tune_depths_with(
        initial,
        &file.fleet,
        file.slo,
        FineTuneOptions {
            search_radius: args.radius,
            collaborative_overhead_s: args.overhead,
            batches: args.batches,
            seed: args.seed,
        },
    )?;
    emit(args.out.as_ref(), &super::to_pretty_json(&tuned)?)
}
