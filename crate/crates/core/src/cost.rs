//! Deployment cost mathematics: average-rate sizing, peak-rate sizing, and
//! the savings/throughput gains from adding CPU offload capacity.
//!
//! Ratios are stored as unit fractions and formatted to one decimal place
//! only at report time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CostInputs, DomainError, Slo};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("mean processing time {mean_processing_s}s exceeds the SLO bound {budget_s}s")]
    InfeasibleProcessing {
        mean_processing_s: f64,
        budget_s: f64,
    },
    #[error("throughput must be > 0")]
    ZeroThroughput,
    #[error("max concurrency must be >= 1")]
    ZeroConcurrency,
    #[error("invalid inputs: {0}")]
    Invalid(#[from] DomainError),
}

/// Deployment cost summary. The strategy costs are present when the full
/// sizing inputs were supplied; the offload ratios need only the two depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub average_strategy_cost: Option<f64>,
    pub peak_strategy_cost: Option<f64>,
    pub waiting_slots: Option<u32>,
    pub peak_savings_ratio: f64,
    pub throughput_gain_ratio: f64,
}

/// Number of other queries that can be processed while one query waits
/// without breaking the SLO: `n = floor((T - t_proc) / t_proc)`.
pub fn waiting_slots(slo: Slo, mean_processing_s: f64) -> Result<u32, CostError> {
    if !(mean_processing_s.is_finite() && mean_processing_s > 0.0) {
        return Err(CostError::Invalid(DomainError::NonPositive {
            field: "mean_processing_s",
            value: mean_processing_s,
        }));
    }
    if mean_processing_s > slo.max_latency_s {
        return Err(CostError::InfeasibleProcessing {
            mean_processing_s,
            budget_s: slo.max_latency_s,
        });
    }
    Ok(((slo.max_latency_s - mean_processing_s) / mean_processing_s).floor() as u32)
}

/// Cost of sizing by average load: `(N / n) / T * D * P`, instances needed to
/// drain the arrival rate through `n` waiting slots at throughput `T`.
pub fn cost_average_strategy(inputs: &CostInputs) -> Result<f64, CostError> {
    inputs.validate()?;
    if inputs.throughput <= 0.0 {
        return Err(CostError::ZeroThroughput);
    }
    let slots = waiting_slots(inputs.slo, inputs.mean_processing_s)?;
    if slots == 0 {
        return Err(CostError::InfeasibleProcessing {
            mean_processing_s: inputs.mean_processing_s,
            budget_s: inputs.slo.max_latency_s,
        });
    }
    Ok((inputs.queries_per_second / slots as f64) / inputs.throughput
        * inputs.devices_per_instance as f64
        * inputs.price_per_device)
}

/// Cost of sizing by peak load: `(N_peak / C) * D * P`.
pub fn cost_peak_strategy(inputs: &CostInputs) -> Result<f64, CostError> {
    inputs.validate()?;
    if inputs.max_concurrency == 0 {
        return Err(CostError::ZeroConcurrency);
    }
    Ok(inputs.peak_queries / inputs.max_concurrency as f64
        * inputs.devices_per_instance as f64
        * inputs.price_per_device)
}

/// Gains from extending system concurrency with CPU offload capacity.
///
/// Peak-sizing savings: `c_cpu / (c_cpu + c_accel)`; average-throughput gain:
/// `c_cpu / c_accel`. `c_accel` must be at least 1.
pub fn offload_gains(c_cpu: u32, c_accel: u32) -> (f64, f64) {
    assert!(c_accel >= 1, "offload_gains requires c_accel >= 1");
    let c_cpu = c_cpu as f64;
    let c_accel = c_accel as f64;
    (c_cpu / (c_cpu + c_accel), c_cpu / c_accel)
}

/// Assembles a full report. `inputs` may be omitted when only the offload
/// ratios are wanted.
pub fn cost_report(
    inputs: Option<&CostInputs>,
    c_cpu: u32,
    c_accel: u32,
) -> Result<CostReport, CostError> {
    let (peak_savings_ratio, throughput_gain_ratio) = offload_gains(c_cpu, c_accel);
    let (average, peak, slots) = match inputs {
        Some(inputs) => (
            Some(cost_average_strategy(inputs)?),
            Some(cost_peak_strategy(inputs)?),
            Some(waiting_slots(inputs.slo, inputs.mean_processing_s)?),
        ),
        None => (None, None, None),
    };
    Ok(CostReport {
        average_strategy_cost: average,
        peak_strategy_cost: peak,
        waiting_slots: slots,
        peak_savings_ratio,
        throughput_gain_ratio,
    })
}

/// Formats a unit ratio as a percentage with one decimal, e.g. `18.6%`.
pub fn format_percent(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn slo(t: f64) -> Slo {
        Slo::new(t).unwrap()
    }

    fn inputs() -> CostInputs {
        CostInputs {
            queries_per_second: 1000.0,
            peak_queries: 1180.0,
            throughput: 100.0,
            max_concurrency: 118,
            devices_per_instance: 1,
            price_per_device: 10.0,
            slo: slo(2.0),
            mean_processing_s: 0.5,
        }
    }

    #[test]
    fn waiting_slots_cases() {
        assert_eq!(waiting_slots(slo(2.0), 0.5).unwrap(), 3);
        assert_eq!(waiting_slots(slo(1.0), 1.0).unwrap(), 0);
        assert!(matches!(
            waiting_slots(slo(1.0), 1.2),
            Err(CostError::InfeasibleProcessing { .. })
        ));
    }

    #[test]
    fn average_strategy_direct_substitution() {
        // N=1000/s, n=3, T=100 q/s, D=1, P=10 -> 33.33
        let cost = cost_average_strategy(&inputs()).unwrap();
        assert_relative_eq!(cost, 1000.0 / 3.0 / 100.0 * 10.0, max_relative = 1e-12);
        assert_relative_eq!(cost, 33.333333333, max_relative = 1e-9);
    }

    #[test]
    fn average_strategy_zero_load_costs_nothing() {
        let mut i = inputs();
        i.queries_per_second = 0.0;
        assert_eq!(cost_average_strategy(&i).unwrap(), 0.0);
    }

    #[test]
    fn average_strategy_guards_zero_slots() {
        let mut i = inputs();
        i.mean_processing_s = 2.0; // n = 0
        assert!(matches!(
            cost_average_strategy(&i),
            Err(CostError::InfeasibleProcessing { .. })
        ));
    }

    #[test]
    fn peak_strategy_direct_substitution() {
        // N_peak=1180, C=118, D=1, P=10 -> 100
        assert_relative_eq!(cost_peak_strategy(&inputs()).unwrap(), 100.0);
    }

    #[test]
    fn peak_strategy_halves_when_concurrency_doubles() {
        let base = cost_peak_strategy(&inputs()).unwrap();
        let mut doubled = inputs();
        doubled.max_concurrency *= 2;
        assert_relative_eq!(cost_peak_strategy(&doubled).unwrap(), base / 2.0);
    }

    #[test]
    fn peak_strategy_zero_load_costs_nothing() {
        let mut i = inputs();
        i.peak_queries = 0.0;
        assert_eq!(cost_peak_strategy(&i).unwrap(), 0.0);
    }

    #[test]
    fn peak_strategy_guards_zero_concurrency() {
        let mut i = inputs();
        i.max_concurrency = 0;
        assert!(matches!(cost_peak_strategy(&i), Err(CostError::ZeroConcurrency)));
    }

    #[test]
    fn offload_gains_reference_depths() {
        let (savings, gain) = offload_gains(22, 96);
        assert_eq!(format_percent(savings), "18.6%");
        assert_eq!(format_percent(gain), "22.9%");

        let (savings, gain) = offload_gains(8, 44);
        assert_eq!(format_percent(savings), "15.4%");
        assert_eq!(format_percent(gain), "18.2%");
    }

    #[test]
    fn offload_gains_no_cpu_capacity() {
        assert_eq!(offload_gains(0, 96), (0.0, 0.0));
    }

    #[test]
    fn savings_gain_identity() {
        for (c, a) in [(22u32, 96u32), (8, 44), (1, 1), (13, 7), (0, 5)] {
            let (savings, gain) = offload_gains(c, a);
            assert_relative_eq!(savings, gain / (1.0 + gain), max_relative = 1e-12);
            assert_eq!(savings == 0.0 && gain == 0.0, c == 0);
        }
    }

    #[test]
    fn report_without_sizing_inputs() {
        let report = cost_report(None, 22, 96).unwrap();
        assert!(report.average_strategy_cost.is_none());
        assert!(report.waiting_slots.is_none());
        assert_relative_eq!(report.peak_savings_ratio, 22.0 / 118.0);
    }

    #[test]
    fn average_cost_scales_linearly_in_price_and_devices() {
        let base = cost_average_strategy(&inputs()).unwrap();
        let mut scaled = inputs();
        scaled.price_per_device *= 3.0;
        assert_relative_eq!(cost_average_strategy(&scaled).unwrap(), base * 3.0);
        let mut devs = inputs();
        devs.devices_per_instance = 4;
        assert_relative_eq!(cost_average_strategy(&devs).unwrap(), base * 4.0);
    }
}
