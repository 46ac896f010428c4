use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::Args;
use peakq_core::calibration::plan_for_fleet;
use tracing_subscriber::EnvFilter;

use super::load_fleet_file;
use crate::gateway::{
    build_router, spawn_workers, ExternalCommandBackend, GatewayConfig, GatewayState,
    SimulatedBackend, WorkerBackend, WorkerMode,
};

#[derive(Args)]
pub struct ServeArgs {
    /// Gateway config (TOML).
    #[arg(long)]
    config: PathBuf,
}

pub fn run(args: ServeArgs) -> anyhow::Result<()> {
    let filter = std::env::var("PEAKQ_LOG").unwrap_or_else(|_| "info".to_string());
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::new(filter))
        .init();
    let config = GatewayConfig::from_path(&args.config)?;
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(config))
}

async fn serve(config: GatewayConfig) -> anyhow::Result<()> {
    let fleet_file = load_fleet_file(&config.fleet_config)?;
    let plan = fleet_file.plan.unwrap_or_else(|| {
        plan_for_fleet(
            &fleet_file.fleet,
            fleet_file.slo,
            config.heterogeneous && fleet_file.fleet.has_both_kinds(),
        )
    });
    tracing::info!(
        "plan resolved: accelerator {}, cpu {}, heterogeneous {}",
        plan.accelerator_depth,
        plan.cpu_depth,
        plan.heterogeneous_enabled
    );

    let (state, handles) =
        GatewayState::build(&fleet_file.fleet, plan, fleet_file.slo, config.heterogeneous)?;
    for (index, handle) in handles.into_iter().enumerate() {
        let backend: Arc<dyn WorkerBackend> = match config.worker_mode {
            WorkerMode::Simulated => Arc::new(SimulatedBackend::new(
                handle.profile.clone(),
                config.seed.expect("validated: simulated mode has a seed") + index as u64,
                config.time_scale,
            )),
            WorkerMode::External => {
                Arc::new(ExternalCommandBackend::new(config.external_command.clone()))
            }
        };
        spawn_workers(Arc::clone(&state), handle, backend);
    }

    if let Some(path) = config.request_log.clone() {
        let state = Arc::clone(&state);
        let interval = Duration::from_secs_f64(config.metrics_flush_interval_s);
        tokio::spawn(async move {
            let mut cursor = 0usize;
            loop {
                tokio::time::sleep(interval).await;
                let records = state.decision_log().snapshot();
                if records.len() > cursor {
                    if let Ok(mut file) = std::fs::OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&path)
                    {
                        for record in &records[cursor..] {
                            if let Ok(line) = serde_json::to_string(record) {
                                let _ = writeln!(file, "{line}");
                            }
                        }
                        cursor = records.len();
                    }
                }
            }
        });
    }

    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    state.set_ready();
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, build_router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .context("serving")
}
