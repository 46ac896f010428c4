use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::Context;
use peakq_core::dispatch::{
    detect_and_plan, dispatch, release, DecisionRecord, DispatchDecisionLog, QueueSet,
};
use peakq_core::domain::{
    meets_slo, DeviceProfile, Fleet, LatencyModel, Placement, Query, QueuePlan, SimMetrics, Slo,
};
use tokio::sync::{mpsc, oneshot};

use super::worker::{Job, WorkerBackend};

/// Channel capacity per pool; admission control bounds in-flight work, the
/// channel only needs room for one queue's worth.
fn channel_capacity(depth: u32) -> usize {
    (depth as usize).max(1) * 2
}

struct PoolState {
    profile: DeviceProfile,
    placement: Placement,
    sender: mpsc::Sender<Job>,
    max_observed: AtomicU32,
}

/// Everything a worker task needs to start serving one device pool.
pub struct PoolHandle {
    pub profile: DeviceProfile,
    pub placement: Placement,
    pub receiver: mpsc::Receiver<Job>,
    pub max_batch: u32,
    pub worker_count: u32,
}

pub struct GatewayState {
    queues: QueueSet,
    heterogeneous: bool,
    slo: Slo,
    primary_model: LatencyModel,
    pools: Vec<PoolState>,
    ready: AtomicBool,
    started: Instant,
    next_id: AtomicU64,
    accepted: AtomicU64,
    rejected_busy: AtomicU64,
    slo_violations: AtomicU64,
    latencies: Mutex<Vec<f64>>,
    log: DispatchDecisionLog,
}

/// Outcome of one embed request, ready for status mapping.
pub enum EmbedOutcome {
    Admitted {
        id: String,
        placement: Placement,
        latency_s: f64,
    },
    Busy {
        id: String,
        retry_after_s: u64,
    },
}

impl GatewayState {
    /// Builds the dispatcher state and one worker handle per device pool.
    pub fn build(
        fleet: &Fleet,
        plan: QueuePlan,
        slo: Slo,
        heterogeneous_requested: bool,
    ) -> anyhow::Result<(Arc<GatewayState>, Vec<PoolHandle>)> {
        let queues = detect_and_plan(fleet, plan, heterogeneous_requested)
            .context("building queue topology")?;
        let mut pools = Vec::new();
        let mut handles = Vec::new();

        let primary_profile = if queues.primary().kind().is_accelerator() {
            fleet.accelerator().expect("accelerator queue has profile")
        } else {
            fleet.primary()
        };
        let primary_placement = if queues.primary().kind().is_accelerator() {
            Placement::Accelerator
        } else {
            Placement::Cpu
        };
        let (tx, rx) = mpsc::channel(channel_capacity(queues.primary().depth_limit()));
        pools.push(PoolState {
            profile: primary_profile.clone(),
            placement: primary_placement,
            sender: tx,
            max_observed: AtomicU32::new(0),
        });
        handles.push(PoolHandle {
            profile: primary_profile.clone(),
            placement: primary_placement,
            receiver: rx,
            max_batch: queues.primary().depth_limit().max(1),
            worker_count: primary_profile.worker_count,
        });

        if let Some(cpu_queue) = queues.overflow() {
            let profile = fleet.offload_cpu().expect("overflow queue has cpu profile");
            let (tx, rx) = mpsc::channel(channel_capacity(cpu_queue.depth_limit()));
            pools.push(PoolState {
                profile: profile.clone(),
                placement: Placement::Cpu,
                sender: tx,
                max_observed: AtomicU32::new(0),
            });
            handles.push(PoolHandle {
                profile: profile.clone(),
                placement: Placement::Cpu,
                receiver: rx,
                max_batch: cpu_queue.depth_limit().max(1),
                worker_count: profile.worker_count,
            });
        }

        let state = Arc::new(GatewayState {
            heterogeneous: queues.heterogeneous(),
            primary_model: primary_profile.latency,
            queues,
            slo,
            pools,
            ready: AtomicBool::new(false),
            started: Instant::now(),
            next_id: AtomicU64::new(0),
            accepted: AtomicU64::new(0),
            rejected_busy: AtomicU64::new(0),
            slo_violations: AtomicU64::new(0),
            latencies: Mutex::new(Vec::new()),
            log: DispatchDecisionLog::new(),
        });
        Ok((state, handles))
    }

    pub fn set_ready(&self) {
        self.ready.store(true, Ordering::Release);
    }

    pub fn is_ready(&self) -> bool {
        self.ready.load(Ordering::Acquire)
    }

    pub fn queues(&self) -> &QueueSet {
        &self.queues
    }

    pub fn decision_log(&self) -> &DispatchDecisionLog {
        &self.log
    }

    fn uptime_s(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    /// Admits one query, hands it to its pool, and waits for the response.
    pub async fn handle_embed(
        &self,
        client_id: Option<String>,
        token_length: u32,
    ) -> anyhow::Result<EmbedOutcome> {
        let seq = self.next_id.fetch_add(1, Ordering::AcqRel);
        let id = client_id.unwrap_or_else(|| format!("req-{seq}"));
        let now = self.uptime_s();
        let query = Query::new(seq, token_length.max(1), now)?;
        let placement = dispatch(&query, &self.queues, self.heterogeneous);
        let (acc_len, cpu_len) = self.queues.lengths();
        self.log.append(DecisionRecord {
            id: seq,
            placement,
            acc_len,
            cpu_len,
            t: now,
        });

        if placement == Placement::Busy {
            self.rejected_busy.fetch_add(1, Ordering::AcqRel);
            // Drain hint: one slot frees roughly every alpha seconds at the
            // head of the priority queue.
            let hint = (self.primary_model.alpha * acc_len as f64).ceil().max(1.0);
            return Ok(EmbedOutcome::Busy {
                id,
                retry_after_s: hint as u64,
            });
        }

        let pool = self
            .pools
            .iter()
            .find(|p| p.placement == placement)
            .expect("admitted placement has a pool");
        let len_now = match placement {
            Placement::Cpu if self.queues.overflow().is_some() => {
                self.queues.overflow().unwrap().len()
            }
            _ => self.queues.primary().len(),
        };
        pool.max_observed.fetch_max(len_now, Ordering::AcqRel);

        let (respond, receive) = oneshot::channel();
        pool.sender
            .send(Job {
                id: seq,
                token_length,
                respond,
            })
            .await
            .map_err(|_| anyhow::anyhow!("worker pool for {placement:?} is gone"))?;
        let latency_s = receive.await.context("worker dropped the batch")??;

        self.accepted.fetch_add(1, Ordering::AcqRel);
        if !meets_slo(latency_s, self.slo) {
            self.slo_violations.fetch_add(1, Ordering::AcqRel);
        }
        self.latencies.lock().expect("latencies poisoned").push(latency_s);
        Ok(EmbedOutcome::Admitted {
            id,
            placement,
            latency_s,
        })
    }

    /// Counters shaped like the simulator's metrics. Throughput is accepted
    /// queries over process uptime.
    pub fn metrics(&self) -> SimMetrics {
        let mut sorted = self.latencies.lock().expect("latencies poisoned").clone();
        sorted.sort_by(f64::total_cmp);
        let percentile = |q: f64| -> f64 {
            if sorted.is_empty() {
                return 0.0;
            }
            let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
            sorted[rank.min(sorted.len()) - 1]
        };
        let mut max_observed = BTreeMap::new();
        for pool in &self.pools {
            max_observed.insert(
                pool.profile.name.clone(),
                pool.max_observed.load(Ordering::Acquire),
            );
        }
        let accepted = self.accepted.load(Ordering::Acquire);
        let uptime = self.uptime_s();
        SimMetrics {
            accepted,
            rejected_busy: self.rejected_busy.load(Ordering::Acquire),
            slo_violations: self.slo_violations.load(Ordering::Acquire),
            max_observed_concurrency: max_observed,
            latency_p50_s: percentile(0.50),
            latency_p99_s: percentile(0.99),
            latency_max_s: sorted.last().copied().unwrap_or(0.0),
            throughput_qps: if uptime > 0.0 {
                accepted as f64 / uptime
            } else {
                0.0
            },
        }
    }
}

/// Spawns `worker_count` batch-forming workers over one pool receiver.
///
/// Each worker takes the first waiting job, greedily drains up to
/// `max_batch - 1` more, prices the batch at the pool's current in-flight
/// count, and releases every slot when the backend finishes.
pub fn spawn_workers(
    state: Arc<GatewayState>,
    handle: PoolHandle,
    backend: Arc<dyn WorkerBackend>,
) {
    let receiver = Arc::new(tokio::sync::Mutex::new(handle.receiver));
    for _ in 0..handle.worker_count.max(1) {
        let receiver = Arc::clone(&receiver);
        let backend = Arc::clone(&backend);
        let state = Arc::clone(&state);
        let profile = handle.profile.clone();
        let placement = handle.placement;
        let max_batch = handle.max_batch as usize;
        tokio::spawn(async move {
            loop {
                let mut batch = Vec::new();
                {
                    let mut rx = receiver.lock().await;
                    match rx.recv().await {
                        Some(job) => batch.push(job),
                        None => return,
                    }
                    while batch.len() < max_batch {
                        match rx.try_recv() {
                            Ok(job) => batch.push(job),
                            Err(_) => break,
                        }
                    }
                }
                let in_flight = match placement {
                    Placement::Cpu if state.queues().overflow().is_some() => {
                        state.queues().overflow().unwrap().len()
                    }
                    _ => state.queues().primary().len(),
                };
                let result = backend.process(&profile, &batch, in_flight).await;
                for job in batch {
                    if release(placement, state.queues()).is_err() {
                        tracing::error!("release underflow on {placement:?}");
                    }
                    let reply = match &result {
                        Ok(latency) => Ok(*latency),
                        Err(e) => Err(anyhow::anyhow!("{e}")),
                    };
                    // The client may have gone away; dropping the send result
                    // is fine, the slot is already released.
                    let _ = job.respond.send(reply);
                }
            }
        });
    }
}
