use clap::{Parser, Subcommand};
use peakq_cli::commands;

/// Admission-control toolkit for heterogeneous accelerator/CPU serving:
/// calibrate device latency lines, derive SLO-safe queue depths, price
/// deployments, replay workloads in simulation, and serve a gateway.
#[derive(Parser)]
#[command(name = "peakq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a latency line from a profiling CSV or a synthetic device.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Largest SLO-safe concurrency for a latency line.
    Estimate(commands::estimate::EstimateArgs),
    /// Incremental stress-test a synthetic device up to the SLO.
    Stress(commands::stress::StressArgs),
    /// Refine queue depths with collaborative simulation.
    Finetune(commands::finetune::FinetuneArgs),
    /// Replay a workload against a fleet and write metrics.
    Simulate(commands::simulate::SimulateArgs),
    /// Deployment cost and offload gains.
    Cost(commands::cost::CostArgs),
    /// Run the serving gateway.
    Serve(commands::serve::ServeArgs),
    /// Render a run directory into a Markdown summary.
    Report(commands::report::ReportArgs),
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::Estimate(args) => commands::estimate::run(args),
        Command::Stress(args) => commands::stress::run(args),
        Command::Finetune(args) => commands::finetune::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Cost(args) => commands::cost::run(args),
        Command::Serve(args) => commands::serve::run(args),
        Command::Report(args) => commands::report::run(args),
    }
}
