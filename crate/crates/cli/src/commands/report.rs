use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde_json::Value;

use super::emit;

#[derive(Args)]
pub struct ReportArgs {
    /// Run directory containing fit/plan/stress/metrics/cost JSON files.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn json_files_with_prefix(dir: &PathBuf, prefix: &str) -> anyhow::Result<Vec<(String, Value)>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let name = match path.file_name().and_then(|n| n.to_str()) {
            Some(n) => n.to_string(),
            None => continue,
        };
        if name.starts_with(prefix) && name.ends_with(".json") {
            let text = std::fs::read_to_string(&path)?;
            let value: Value =
                serde_json::from_str(&text).with_context(|| format!("parsing {name}"))?;
            found.push((name, value));
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found)
}

fn num(value: &Value, key: &str) -> String {
    match value.get(key) {
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(Value::Null) | None => "-".into(),
        Some(other) => other.to_string(),
    }
}

pub fn run(args: ReportArgs) -> anyhow::Result<()> {
    let mut md = String::from("# Run summary\n");

    let fits = json_files_with_prefix(&args.dir, "fit")?;
    if !fits.is_empty() {
        md.push_str("\n## Calibrated latency lines\n\n");
        md.push_str("| file | alpha (s/query) | beta (s) | r² | samples |\n");
        md.push_str("|---|---|---|---|---|\n");
        for (name, v) in &fits {
            writeln!(
                md,
                "| {name} | {} | {} | {} | {} |",
                num(v, "alpha"),
                num(v, "beta"),
                num(v, "r_squared"),
                num(v, "n")
            )?;
        }
    }

    let plans = json_files_with_prefix(&args.dir, "plan")?;
    if !plans.is_empty() {
        md.push_str("\n## Queue plans\n\n");
        md.push_str("| file | accelerator depth | cpu depth | heterogeneous |\n");
        md.push_str("|---|---|---|---|\n");
        for (name, v) in &plans {
            writeln!(
                md,
                "| {name} | {} | {} | {} |",
                num(v, "accelerator_depth"),
                num(v, "cpu_depth"),
                num(v, "heterogeneous_enabled")
            )?;
        }
    }

    let stresses = json_files_with_prefix(&args.dir, "stress")?;
    if !stresses.is_empty() {
        md.push_str("\n## Stress tests\n\n");
        md.push_str("| file | depth | probes |\n");
        md.push_str("|---|---|---|\n");
        for (name, v) in &stresses {
            let probes = v.get("probes").and_then(Value::as_array).map_or(0, Vec::len);
            writeln!(md, "| {name} | {} | {probes} |", num(v, "depth"))?;
        }
    }

    let metrics = json_files_with_prefix(&args.dir, "metrics")?;
    if !metrics.is_empty() {
        md.push_str("\n## Simulated runs\n\n");
        md.push_str(
            "| file | accepted | busy | SLO violations | p50 (s) | p99 (s) | max (s) | throughput (q/s) |\n",
        );
        md.push_str("|---|---|---|---|---|---|---|---|\n");
        for (name, v) in &metrics {
            writeln!(
                md,
                "| {name} | {} | {} | {} | {} | {} | {} | {} |",
                num(v, "accepted"),
                num(v, "rejected_busy"),
                num(v, "slo_violations"),
                num(v, "latency_p50_s"),
                num(v, "latency_p99_s"),
                num(v, "latency_max_s"),
                num(v, "throughput_qps")
            )?;
        }
    }

    let costs = json_files_with_prefix(&args.dir, "cost")?;
    if !costs.is_empty() {
        md.push_str("\n## Deployment cost\n\n");
        md.push_str("| file | average-sizing cost | peak-sizing cost | waiting slots | peak savings | throughput gain |\n");
        md.push_str("|---|---|---|---|---|---|\n");
        for (name, v) in &costs {
            writeln!(
                md,
                "| {name} | {} | {} | {} | {} | {} |",
                num(v, "average_strategy_cost"),
                num(v, "peak_strategy_cost"),
                num(v, "waiting_slots"),
                num(v, "peak_savings_pct"),
                num(v, "throughput_gain_pct")
            )?;
        }
    }

    if fits.is_empty() && plans.is_empty() && stresses.is_empty() && metrics.is_empty() && costs.is_empty() {
        md.push_str("\nNo run artifacts found.\n");
    }

    emit(args.out.as_ref(), &md)
}
