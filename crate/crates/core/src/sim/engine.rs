use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use super::device::SimulatedDevice;
use super::workload::{generate_diurnal, WorkloadMode, WorkloadSpec};
use crate::dispatch::{detect_and_plan, dispatch, release, QueueSet};
use crate::domain::{meets_slo, Fleet, Placement, Query, QueuePlan, SimMetrics, Slo};

/// Index of the queue a device runtime is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pool {
    Primary,
    Overflow,
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    submitted_at: f64,
    /// Closed-loop slot that owns the query; `None` for open-loop arrivals.
    slot: Option<usize>,
}

#[derive(Debug)]
enum EventKind {
    Arrival,
    BatchDone { pool: Pool, batch: Vec<InFlight> },
}

struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest-first with
        // insertion order breaking ties.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// One device pool: its synthetic hardware, admitted-but-unserved queries,
/// worker occupancy, and per-pool accounting.
struct PoolRuntime {
    name: String,
    device: SimulatedDevice,
    pending: VecDeque<InFlight>,
    busy_workers: u32,
    worker_count: u32,
    max_batch: u32,
    placement: Placement,
    completed: u64,
    first_admission: Option<f64>,
    last_completion: f64,
    max_observed: u32,
}

struct Engine<'a> {
    queues: &'a QueueSet,
    heterogeneous: bool,
    pools: Vec<PoolRuntime>,
    events: BinaryHeap<Event>,
    next_seq: u64,
    clock: f64,
    accepted: u64,
    rejected_busy: u64,
    slo_violations: u64,
    latencies: Vec<f64>,
    slo: Slo,
    next_query_id: u64,
    query_length: u32,
    // Closed-loop driver state.
    slot_budget: Vec<u32>,
    wake_list: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn push_event(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(Event { time, seq, kind });
    }

    fn pool_index(&self, placement: Placement) -> Option<usize> {
        self.pools.iter().position(|p| p.placement == placement)
    }

    /// Submits one query through the dispatcher. Returns its placement.
    fn submit(&mut self, slot: Option<usize>) -> Placement {
        let query = Query::new(self.next_query_id, self.query_length, self.clock)
            .expect("engine builds valid queries");
        self.next_query_id += 1;
        let placement = dispatch(&query, self.queues, self.heterogeneous);
        match placement {
            Placement::Busy => self.rejected_busy += 1,
            admitted => {
                self.accepted += 1;
                let idx = self
                    .pool_index(admitted)
                    .expect("admission only to existing pools");
                let tag = if idx == 0 { Pool::Primary } else { Pool::Overflow };
                let len = self.queue_len(tag);
                let pool = &mut self.pools[idx];
                pool.pending.push_back(InFlight {
                    submitted_at: self.clock,
                    slot,
                });
                pool.first_admission.get_or_insert(self.clock);
                pool.max_observed = pool.max_observed.max(len);
            }
        }
        placement
    }

    fn queue_len(&self, pool: Pool) -> u32 {
        match pool {
            Pool::Primary => self.queues.primary().len(),
            Pool::Overflow => self.queues.overflow().map_or(0, |q| q.len()),
        }
    }

    /// Starts batches on every pool with idle workers and pending queries.
    /// The batch's service latency is priced at the pool's in-flight count at
    /// this instant (the admission counter, snapshot semantics).
    fn start_batches(&mut self) {
        for idx in 0..self.pools.len() {
            let tag = if idx == 0 { Pool::Primary } else { Pool::Overflow };
            loop {
                let in_flight = self.queue_len(tag);
                let pool = &mut self.pools[idx];
                if pool.busy_workers >= pool.worker_count || pool.pending.is_empty() {
                    break;
                }
                let take = (pool.max_batch.max(1) as usize).min(pool.pending.len());
                let batch: Vec<InFlight> = pool.pending.drain(..take).collect();
                let latency = pool.device.sample_latency(in_flight);
                pool.busy_workers += 1;
                let done_at = self.clock + latency;
                self.push_event(done_at, EventKind::BatchDone { pool: tag, batch });
            }
        }
    }

    /// Closed-loop slots that have a response (or a rejection) submit their
    /// next query, in slot order, spending one unit of budget each.
    fn drain_wake_list(&mut self) {
        if self.wake_list.is_empty() {
            return;
        }
        let mut slots = std::mem::take(&mut self.wake_list);
        slots.sort_unstable();
        slots.dedup();
        for slot in slots {
            if self.slot_budget[slot] == 0 {
                continue;
            }
            self.slot_budget[slot] -= 1;
            if self.submit(Some(slot)) == Placement::Busy {
                // Declined: retry when the next completion frees capacity.
                self.wake_list.push(slot);
            }
        }
    }

    fn complete_batch(&mut self, pool: Pool, batch: Vec<InFlight>) {
        let idx = match pool {
            Pool::Primary => 0,
            Pool::Overflow => 1,
        };
        let placement = self.pools[idx].placement;
        self.pools[idx].busy_workers -= 1;
        self.pools[idx].completed += batch.len() as u64;
        self.pools[idx].last_completion = self.clock;
        for item in batch {
            release(placement, self.queues).expect("release matches admit");
            let e2e = self.clock - item.submitted_at;
            if !meets_slo(e2e, self.slo) {
                self.slo_violations += 1;
            }
            self.latencies.push(e2e);
            if let Some(slot) = item.slot {
                if self.slot_budget[slot] > 0 {
                    self.wake_list.push(slot);
                }
            }
        }
    }

    fn run(&mut self) {
        self.drain_wake_list();
        self.start_batches();
        while let Some(event) = self.events.pop() {
            self.clock = event.time;
            match event.kind {
                EventKind::Arrival => {
                    self.submit(None);
                }
                EventKind::BatchDone { pool, batch } => {
                    self.complete_batch(pool, batch);
                    self.drain_wake_list();
                }
            }
            self.start_batches();
        }
    }

    fn into_metrics(mut self) -> SimMetrics {
        self.latencies.sort_by(f64::total_cmp);
        let percentile = |sorted: &[f64], q: f64| -> f64 {
            if sorted.is_empty() {
                return 0.0;
            }
            let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
            sorted[rank.min(sorted.len()) - 1]
        };
        let mut max_observed = BTreeMap::new();
        let mut throughput = 0.0;
        for pool in &self.pools {
            max_observed.insert(pool.name.clone(), pool.max_observed);
            if pool.completed > 0 {
                let span = pool.last_completion - pool.first_admission.unwrap_or(0.0);
                if span > 0.0 {
                    throughput += pool.completed as f64 / span;
                }
            }
        }
        SimMetrics {
            accepted: self.accepted,
            rejected_busy: self.rejected_busy,
            slo_violations: self.slo_violations,
            max_observed_concurrency: max_observed,
            latency_p50_s: percentile(&self.latencies, 0.50),
            latency_p99_s: percentile(&self.latencies, 0.99),
            latency_max_s: self.latencies.last().copied().unwrap_or(0.0),
            throughput_qps: throughput,
        }
    }
}

/// Runs the admission system of queues + devices against a workload in
/// virtual time. Deterministic given the workload seed; infeasible
/// configurations surface as SLO violations or busy rejections in the
/// metrics, never as errors.
pub fn simulate(fleet: &Fleet, plan: QueuePlan, workload: &WorkloadSpec, slo: Slo) -> SimMetrics {
    let queues = detect_and_plan(fleet, plan, plan.heterogeneous_enabled)
        .expect("validated fleet has devices");

    let mut pools = Vec::new();
    let primary_profile = match queues.primary().kind() {
        k if k.is_accelerator() => fleet.accelerator().expect("accelerator queue has profile"),
        _ => fleet.primary(),
    };
    pools.push(PoolRuntime {
        name: primary_profile.name.clone(),
        device: SimulatedDevice::new(primary_profile.clone(), workload.seed),
        pending: VecDeque::new(),
        busy_workers: 0,
        worker_count: primary_profile.worker_count,
        max_batch: queues.primary().depth_limit(),
        placement: match queues.primary().kind() {
            k if k.is_accelerator() => Placement::Accelerator,
            _ => Placement::Cpu,
        },
        completed: 0,
        first_admission: None,
        last_completion: 0.0,
        max_observed: 0,
    });
    if let Some(cpu_queue) = queues.overflow() {
        let profile = fleet.offload_cpu().expect("overflow queue has cpu profile");
        pools.push(PoolRuntime {
            name: profile.name.clone(),
            device: SimulatedDevice::new(profile.clone(), workload.seed),
            pending: VecDeque::new(),
            busy_workers: 0,
            worker_count: profile.worker_count,
            max_batch: cpu_queue.depth_limit(),
            placement: Placement::Cpu,
            completed: 0,
            first_admission: None,
            last_completion: 0.0,
            max_observed: 0,
        });
    }

    let mut engine = Engine {
        queues: &queues,
        heterogeneous: plan.heterogeneous_enabled,
        pools,
        events: BinaryHeap::new(),
        next_seq: 0,
        clock: 0.0,
        accepted: 0,
        rejected_busy: 0,
        slo_violations: 0,
        latencies: Vec::new(),
        slo,
        next_query_id: 0,
        query_length: workload.query_length.max(1),
        slot_budget: Vec::new(),
        wake_list: Vec::new(),
    };

    match &workload.mode {
        WorkloadMode::ClosedLoop { concurrency, batches } => {
            let slots = *concurrency as usize;
            engine.slot_budget = vec![*batches; slots];
            engine.wake_list = (0..slots).collect();
        }
        WorkloadMode::DiurnalOpenLoop(spec) => {
            let arrivals = generate_diurnal(spec, workload.seed);
            for t in arrivals {
                engine.push_event(t, EventKind::Arrival);
            }
        }
    }

    engine.run();
    engine.into_metrics()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{validate_fleet, DeviceKind, DeviceProfile, LatencyModel};
    use crate::sim::workload::DiurnalSpec;
    use approx::assert_relative_eq;

    fn device(name: &str, kind: DeviceKind, alpha: f64, beta: f64) -> DeviceProfile {
        DeviceProfile::new(name, kind, LatencyModel::new(alpha, beta).unwrap(), 1, 0.0).unwrap()
    }

    fn accel_fleet() -> Fleet {
        validate_fleet(vec![device("gpu", DeviceKind::Accelerator, 0.018, 0.27)]).unwrap()
    }

    fn hetero_fleet() -> Fleet {
        validate_fleet(vec![
            device("gpu", DeviceKind::Accelerator, 0.018, 0.27),
            device("cpu", DeviceKind::Cpu, 0.084, 0.32),
        ])
        .unwrap()
    }

    fn slo(t: f64) -> Slo {
        Slo::new(t).unwrap()
    }

    #[test]
    fn saturated_closed_loop_sits_on_the_line() {
        let metrics = simulate(
            &accel_fleet(),
            QueuePlan::single(96),
            &WorkloadSpec::closed_loop(96, 10, 1),
            slo(2.0),
        );
        assert_eq!(metrics.slo_violations, 0);
        assert_eq!(metrics.rejected_busy, 0);
        assert_eq!(metrics.accepted, 96 * 10);
        assert_relative_eq!(metrics.latency_max_s, 1.998, max_relative = 1e-9);
        assert_eq!(metrics.max_observed_concurrency["gpu"], 96);
    }

    #[test]
    fn one_busy_rejection_per_round_when_over_depth() {
        let metrics = simulate(
            &accel_fleet(),
            QueuePlan::single(96),
            &WorkloadSpec::closed_loop(97, 10, 1),
            slo(2.0),
        );
        assert_eq!(metrics.rejected_busy, 10);
        assert_eq!(metrics.accepted, 96 * 10);
        assert_eq!(metrics.total_submitted(), 97 * 10);
    }

    #[test]
    fn heterogeneous_plan_splits_and_meets_slo() {
        let metrics = simulate(
            &hetero_fleet(),
            QueuePlan::new(96, 20, true).unwrap(),
            &WorkloadSpec::closed_loop(116, 10, 1),
            slo(2.0),
        );
        // Both lines at their depths stay within 2 s: 1.998 and exactly 2.0.
        assert_eq!(metrics.slo_violations, 0);
        assert_eq!(metrics.rejected_busy, 0);
        assert_eq!(metrics.max_observed_concurrency["gpu"], 96);
        assert_eq!(metrics.max_observed_concurrency["cpu"], 20);
    }

    #[test]
    fn depth_plus_one_violates() {
        let metrics = simulate(
            &accel_fleet(),
            QueuePlan::single(97),
            &WorkloadSpec::closed_loop(97, 3, 1),
            slo(2.0),
        );
        assert!(metrics.slo_violations >= 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let fleet = validate_fleet(vec![DeviceProfile::new(
            "gpu",
            DeviceKind::Accelerator,
            LatencyModel::new(0.018, 0.27).unwrap(),
            1,
            0.02,
        )
        .unwrap()])
        .unwrap();
        let workload = WorkloadSpec::closed_loop(50, 8, 99);
        let a = simulate(&fleet, QueuePlan::single(64), &workload, slo(2.0));
        let b = simulate(&fleet, QueuePlan::single(64), &workload, slo(2.0));
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
    }

    #[test]
    fn open_loop_counts_are_conserved() {
        let workload = WorkloadSpec {
            mode: WorkloadMode::DiurnalOpenLoop(DiurnalSpec {
                base_rate: 40.0,
                peak_rate: 40.0,
                peak_hours: vec![],
                duration_s: 120.0,
            }),
            query_length: 75,
            seed: 5,
        };
        let metrics = simulate(&accel_fleet(), QueuePlan::single(16), &workload, slo(2.0));
        assert!(metrics.accepted > 0);
        assert_eq!(
            metrics.total_submitted(),
            metrics.accepted + metrics.rejected_busy
        );
        assert!(metrics.max_observed_concurrency["gpu"] <= 16);
        assert!(metrics.slo_violations <= metrics.accepted);
    }

    #[test]
    fn open_loop_light_load_has_single_query_latency() {
        let workload = WorkloadSpec {
            mode: WorkloadMode::DiurnalOpenLoop(DiurnalSpec {
                base_rate: 0.1,
                peak_rate: 0.1,
                peak_hours: vec![],
                duration_s: 200.0,
            }),
            query_length: 75,
            seed: 11,
        };
        let metrics = simulate(&accel_fleet(), QueuePlan::single(8), &workload, slo(2.0));
        // Arrivals are far apart: every batch is a single query at
        // concurrency 1.
        assert!(metrics.accepted > 0);
        assert_relative_eq!(metrics.latency_p50_s, 0.288, max_relative = 1e-6);
    }

    #[test]
    fn all_rejected_when_depth_zero() {
        let metrics = simulate(
            &accel_fleet(),
            QueuePlan::single(0),
            &WorkloadSpec::closed_loop(4, 3, 1),
            slo(1.0),
        );
        assert_eq!(metrics.accepted, 0);
        // Nothing ever completes, so the busy slots never wake again after
        // the first attempt.
        assert_eq!(metrics.rejected_busy, 4);
    }
}
