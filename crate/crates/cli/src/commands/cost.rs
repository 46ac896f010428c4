use std::path::PathBuf;

use clap::Args;
use peakq_core::cost::{cost_report, format_percent};
use peakq_core::domain::{CostInputs, Slo};
use serde::Serialize;

use super::emit;

#[derive(Args)]
pub struct CostArgs {
    /// CPU queue depth (offload capacity).
    #[arg(long)]
    c_cpu: u32,
    /// Accelerator queue depth.
    #[arg(long)]
    c_accel: u32,
    /// Average arrival rate N, queries per second.
    #[arg(long)]
    qps: Option<f64>,
    /// Peak concurrent queries N_peak.
    #[arg(long)]
    peak: Option<f64>,
    /// Instance throughput, queries per second.
    #[arg(long)]
    throughput: Option<f64>,
    /// System maximum concurrency C.
    #[arg(long)]
    concurrency: Option<u32>,
    /// Devices per instance D.
    #[arg(long, default_value_t = 1)]
    devices: u32,
    /// Price per device P.
    #[arg(long)]
    price: Option<f64>,
    /// SLO bound in seconds.
    #[arg(long)]
    slo: Option<f64>,
    /// Mean processing time per query, seconds.
    #[arg(long)]
    t_proc: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CostDocument {
    #[serde(flatten)]
    report: peakq_core::cost::CostReport,
    peak_savings_pct: String,
    throughput_gain_pct: String,
}

pub fn run(args: CostArgs) -> anyhow::Result<()> {
    let inputs = match (args.qps, args.peak, args.throughput, args.concurrency, args.price, args.slo, args.t_proc)
    {
        (Some(qps), Some(peak), Some(throughput), Some(concurrency), Some(price), Some(slo), Some(t_proc)) => {
            Some(CostInputs {
                queries_per_second: qps,
                peak_queries: peak,
                throughput,
                max_concurrency: concurrency,
                devices_per_instance: args.devices,
                price_per_device: price,
                slo: Slo::new(slo)?,
                mean_processing_s: t_proc,
            })
        }
        _ => None,
    };
    let report = cost_report(inputs.as_ref(), args.c_cpu, args.c_accel)?;
    let doc = CostDocument {
        peak_savings_pct: format_percent(report.peak_savings_ratio),
        throughput_gain_pct: format_percent(report.throughput_gain_ratio),
        report,
    };
    emit(args.out.as_ref(), &super::to_pretty_json(&doc)?)
}
