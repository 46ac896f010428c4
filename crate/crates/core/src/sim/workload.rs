use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seconds spent ramping between the base and peak rate at the edge of a
/// peak interval.
const RAMP_S: f64 = 360.0;

const SECONDS_PER_HOUR: f64 = 3600.0;
const SECONDS_PER_DAY: f64 = 86_400.0;

fn default_query_length() -> u32 {
    75
}

/// Diurnal open-loop parameters: a base arrival rate lifted to `peak_rate`
/// during the given hours of the day, with sinusoidal ramps at the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiurnalSpec {
    pub base_rate: f64,
    pub peak_rate: f64,
    /// Hours of the day (0-23) running at the peak rate; adjacent hours merge
    /// into one plateau.
    pub peak_hours: Vec<u32>,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WorkloadMode {
    /// Hold exactly `concurrency` request slots; each slot submits its next
    /// query as soon as it has a response, up to `batches` submissions per
    /// slot. A slot that was declined retries at the next completion.
    ClosedLoop { concurrency: u32, batches: u32 },
    /// Poisson arrivals following the diurnal rate curve.
    DiurnalOpenLoop(DiurnalSpec),
}

/// A complete workload description; fully determined by its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    #[serde(flatten)]
    pub mode: WorkloadMode,
    #[serde(default = "default_query_length")]
    pub query_length: u32,
    /// Keep within 0..=i64::MAX when the spec lives in a TOML file (TOML
    /// integers are signed 64-bit).
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn closed_loop(concurrency: u32, batches: u32, seed: u64) -> Self {
        Self {
            mode: WorkloadMode::ClosedLoop { concurrency, batches },
            query_length: default_query_length(),
            seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("workload serializes")
    }
}

/// Peak intervals in seconds-of-day, adjacent hours merged.
fn peak_intervals(peak_hours: &[u32]) -> Vec<(f64, f64)> {
    let mut hours: Vec<u32> = peak_hours.iter().map(|h| h % 24).collect();
    hours.sort_unstable();
    hours.dedup();
    let mut intervals: Vec<(u32, u32)> = Vec::new();
    for h in hours {
        match intervals.last_mut() {
            Some((_, end)) if *end == h => *end = h + 1,
            _ => intervals.push((h, h + 1)),
        }
    }
    intervals
        .into_iter()
        .map(|(s, e)| (s as f64 * SECONDS_PER_HOUR, e as f64 * SECONDS_PER_HOUR))
        .collect()
}

/// Instantaneous arrival rate at time `t` (seconds since the run started,
/// wrapped onto a 24 h day).
pub fn diurnal_rate_at(spec: &DiurnalSpec, t: f64) -> f64 {
    let t = t.rem_euclid(SECONDS_PER_DAY);
    let mut shape: f64 = 0.0;
    for &(start, end) in &peak_intervals(&spec.peak_hours) {
        if t < start || t >= end {
            continue;
        }
        let ramp = RAMP_S.min((end - start) / 2.0);
        let s = if t < start + ramp {
            // Half-cosine rise from 0 to 1.
            0.5 - 0.5 * (std::f64::consts::PI * (t - start) / ramp).cos()
        } else if t > end - ramp {
            // Mirror image: half-cosine fall from 1 back to 0 at the edge.
            0.5 - 0.5 * (std::f64::consts::PI * (end - t) / ramp).cos()
        } else {
            1.0
        };
        shape = shape.max(s);
    }
    spec.base_rate + (spec.peak_rate - spec.base_rate) * shape
}

/// Generates the arrival sequence for a diurnal spec: a Poisson process at
/// the envelope rate, thinned down to the rate curve. Deterministic given the
/// seed; times are strictly within `[0, duration_s)` and ascending.
pub fn generate_diurnal(spec: &DiurnalSpec, seed: u64) -> Vec<f64> {
    let envelope = spec.base_rate.max(spec.peak_rate);
    if envelope <= 0.0 || spec.duration_s <= 0.0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrivals = Vec::new();
    let mut t = 0.0;
    loop {
        // Exponential gap at the envelope rate; 1 - U keeps the argument in
        // (0, 1] so the log is finite.
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / envelope;
        if t >= spec.duration_s {
            return arrivals;
        }
        let keep: f64 = rng.gen();
        if keep * envelope < diurnal_rate_at(spec, t) {
            arrivals.push(t);
        }
    }
}
