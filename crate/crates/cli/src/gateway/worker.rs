use std::process::Stdio;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::Context;
use async_trait::async_trait;
use peakq_core::domain::DeviceProfile;
use peakq_core::sim::SimulatedDevice;
use tokio::io::AsyncWriteExt;

/// One admitted query waiting for a worker.
#[derive(Debug)]
pub struct Job {
    pub id: u64,
    pub token_length: u32,
    pub respond: tokio::sync::oneshot::Sender<anyhow::Result<f64>>,
}

/// Turns a batch of admitted queries into a processing latency. The
/// dispatcher never blocks on this; it runs on the device pool's workers.
#[async_trait]
pub trait WorkerBackend: Send + Sync + 'static {
    /// Processes `batch` on `device` while `in_flight` queries are admitted
    /// there; returns the batch latency in seconds (virtual for simulated
    /// backends, wall for real ones).
    async fn process(
        &self,
        device: &DeviceProfile,
        batch: &[Job],
        in_flight: u32,
    ) -> anyhow::Result<f64>;
}

/// Prices batches on the device's latency line and sleeps the scaled amount,
/// so the gateway behaves like the simulator under real concurrency.
pub struct SimulatedBackend {
    device: Mutex<SimulatedDevice>,
    time_scale: f64,
}

impl SimulatedBackend {
    pub fn new(profile: DeviceProfile, seed: u64, time_scale: f64) -> Self {
        Self {
            device: Mutex::new(SimulatedDevice::new(profile, seed)),
            time_scale,
        }
    }
}

#[async_trait]
impl WorkerBackend for SimulatedBackend {
    async fn process(
        &self,
        _device: &DeviceProfile,
        _batch: &[Job],
        in_flight: u32,
    ) -> anyhow::Result<f64> {
        let latency = self
            .device
            .lock()
            .expect("device lock poisoned")
            .sample_latency(in_flight);
        let sleep_s = latency * self.time_scale;
        if sleep_s > 0.0 {
            tokio::time::sleep(Duration::from_secs_f64(sleep_s)).await;
        }
        Ok(latency)
    }
}

/// Shells out once per batch, feeding one JSON line per query to stdin; the
/// measured wall time is the batch latency. The seam for plugging a real
/// embedding engine behind the dispatcher.
pub struct ExternalCommandBackend {
    argv: Vec<String>,
}

impl ExternalCommandBackend {
    pub fn new(argv: Vec<String>) -> Self {
        assert!(!argv.is_empty(), "external command must be non-empty");
        Self { argv }
    }
}

#[async_trait]
impl WorkerBackend for ExternalCommandBackend {
    async fn process(
        &self,
        _device: &DeviceProfile,
        batch: &[Job],
        _in_flight: u32,
    ) -> anyhow::Result<f64> {
        let started = Instant::now();
        let mut command = tokio::process::Command::new(&self.argv[0]);
        command
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null());
        let mut child = command.spawn().context("spawning external worker")?;
        let mut stdin = child.stdin.take().context("external worker stdin")?;
        let mut payload = String::new();
        for job in batch {
            payload.push_str(&format!(
                "{{\"id\":{},\"token_length\":{}}}\n",
                job.id, job.token_length
            ));
        }
        stdin.write_all(payload.as_bytes()).await?;
        drop(stdin);
        let status = child.wait().await?;
        if !status.success() {
            anyhow::bail!("external worker exited with {status}");
        }
        Ok(started.elapsed().as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use peakq_core::domain::{DeviceKind, LatencyModel};

    fn profile() -> DeviceProfile {
        DeviceProfile::new(
            "gpu",
            DeviceKind::Accelerator,
            LatencyModel::new(0.01, 0.3).unwrap(),
            1,
            0.0,
        )
        .unwrap()
    }

    #[tokio::test]
    async fn simulated_backend_prices_on_the_line() {
        let backend = SimulatedBackend::new(profile(), 1, 0.0);
        let latency = backend.process(&profile(), &[], 10).await.unwrap();
        assert!((latency - 0.4).abs() < 1e-12);
    }

    #[tokio::test]
    async fn external_backend_runs_command() {
        let backend =
            ExternalCommandBackend::new(vec!["sh".into(), "-c".into(), "cat > /dev/null".into()]);
        let (tx, _rx) = tokio::sync::oneshot::channel();
        let jobs = vec![Job {
            id: 1,
            token_length: 75,
            respond: tx,
        }];
        let latency = backend.process(&profile(), &jobs, 1).await.unwrap();
        assert!(latency >= 0.0);
    }

    #[tokio::test]
    async fn external_backend_surfaces_failure() {
        let backend = ExternalCommandBackend::new(vec!["sh".into(), "-c".into(), "exit 3".into()]);
        assert!(backend.process(&profile(), &[], 1).await.is_err());
    }
}
