use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::estimate::UNBOUNDED_DEPTH_CAP;
use super::fit::{fit_latency_model, FitError, FitResult, ProfilingSample};
use crate::domain::{meets_slo, Slo};

/// Default client-side cost of submitting one query when ramping a stress
/// probe, in seconds. A probe at concurrency `C` cannot materialize all `C`
/// queries at one instant; the batch forms only once the last one lands, so
/// the first query's end-to-end time stretches by `(C - 1)` submissions.
/// 0.1 ms per query matches observed dispatch overhead on real deployments
/// and is why coarse stress steps under-report large depths.
pub const DEFAULT_SUBMIT_OVERHEAD_S: f64 = 1e-4;

/// Anything that can run a closed-loop batch at an exact concurrency and
/// report the measured processing latency. The simulator's device implements
/// this; a hardware harness could too.
pub trait DeviceProbe {
    /// Mean processing latency of one closed-loop batch held at exactly
    /// `concurrency` queries in flight.
    fn measure_closed_loop(&mut self, concurrency: u32) -> f64;
}

#[derive(Debug, Error, PartialEq)]
pub enum StressError {
    #[error("device misses the SLO at the first probe (concurrency {probe}): {measured_s:.4}s > {budget_s}s")]
    DeviceInfeasible {
        probe: u32,
        measured_s: f64,
        budget_s: f64,
    },
    #[error("step must be >= 1")]
    ZeroStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressOptions {
    /// Concurrency increment between probes.
    pub step: u32,
    /// Per-query submission cost added to each probe's measured latency.
    pub submit_overhead_s: f64,
    /// Ladder safety cap for devices that never fail a probe.
    pub max_probe: u32,
}

impl StressOptions {
    pub fn with_step(step: u32) -> Self {
        Self {
            step,
            submit_overhead_s: DEFAULT_SUBMIT_OVERHEAD_S,
            max_probe: UNBOUNDED_DEPTH_CAP,
        }
    }
}

/// Outcome of a stress ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressReport {
    /// Last probed concurrency that met the SLO (a multiple of the step).
    pub depth: u32,
    /// Every `(concurrency, measured latency)` pair probed, in order.
    pub probes: Vec<(u32, f64)>,
    /// Set when the ladder hit `max_probe` without ever failing.
    pub capped: bool,
}

/// Probes `step, 2*step, ...` until the measured latency exceeds the SLO and
/// returns the last passing concurrency.
///
/// The measurement includes the harness's submission overhead, so a coarse
/// step can under-report the true bound: a probe that lands on the bound with
/// only a few milliseconds of headroom fails once the ramp cost is added.
/// Fails with `DeviceInfeasible` when the first probe already overruns.
pub fn run_stress_test(
    probe: &mut dyn DeviceProbe,
    slo: Slo,
    step: u32,
) -> Result<StressReport, StressError> {
    run_stress_test_with(probe, slo, StressOptions::with_step(step))
}

pub fn run_stress_test_with(
    probe: &mut dyn DeviceProbe,
    slo: Slo,
    options: StressOptions,
) -> Result<StressReport, StressError> {
    if options.step == 0 {
        return Err(StressError::ZeroStep);
    }
    let mut probes = Vec::new();
    let mut last_pass: Option<u32> = None;
    let mut concurrency = options.step;
    loop {
        let measured = probe.measure_closed_loop(concurrency)
            + (concurrency - 1) as f64 * options.submit_overhead_s;
        probes.push((concurrency, measured));
        if !meets_slo(measured, slo) {
            return match last_pass {
                Some(depth) => Ok(StressReport {
                    depth,
                    probes,
                    capped: false,
                }),
                None => Err(StressError::DeviceInfeasible {
                    probe: concurrency,
                    measured_s: measured,
                    budget_s: slo.max_latency_s,
                }),
            };
        }
        last_pass = Some(concurrency);
        if concurrency >= options.max_probe {
            return Ok(StressReport {
                depth: concurrency,
                probes,
                capped: true,
            });
        }
        concurrency += options.step;
    }
}

/// Profiling schedule for calibration: a 2-point pilot refined into
/// `points` geometrically spaced levels on `[1, 2 * (T - beta) / alpha]`.
///
/// The pilot bounds where the interesting region ends without committing to
/// a step size; the geometric spread samples it with few sessions.
pub fn profiling_schedule(probe: &mut dyn DeviceProbe, slo: Slo, points: usize) -> Vec<u32> {
    let pilot = [
        ProfilingSample {
            concurrency: 1,
            observed_latency_s: probe.measure_closed_loop(1).max(f64::MIN_POSITIVE),
        },
        ProfilingSample {
            concurrency: 2,
            observed_latency_s: probe.measure_closed_loop(2).max(f64::MIN_POSITIVE),
        },
    ];
    let upper = match fit_latency_model(&pilot) {
        Ok(fit) if fit.model.alpha > 0.0 => {
            let bound = 2.0 * (slo.max_latency_s - fit.model.beta) / fit.model.alpha;
            bound.clamp(2.0, UNBOUNDED_DEPTH_CAP as f64)
        }
        _ => 64.0,
    };
    let points = points.max(2);
    let ratio = upper.powf(1.0 / (points as f64 - 1.0));
    let mut schedule: Vec<u32> = (0..points)
        .map(|i| ratio.powi(i as i32).round().max(1.0) as u32)
        .collect();
    schedule.dedup();
    // Geometric rounding can collide at small values; nudge forward to keep
    // the levels distinct.
    for i in 1..schedule.len() {
        if schedule[i] <= schedule[i - 1] {
            schedule[i] = schedule[i - 1] + 1;
        }
    }
    schedule
}

/// Full calibration pass: derive a schedule, measure it, fit the line.
pub fn calibrate_device(
    probe: &mut dyn DeviceProbe,
    slo: Slo,
    points: usize,
) -> Result<FitResult, FitError> {
    let schedule = profiling_schedule(probe, slo, points);
    let samples: Vec<ProfilingSample> = schedule
        .iter()
        .map(|&c| ProfilingSample {
            concurrency: c,
            observed_latency_s: probe.measure_closed_loop(c),
        })
        .collect();
    fit_latency_model(&samples)
}
