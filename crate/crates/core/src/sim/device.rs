use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::{DeviceProbe, ProfilingSample};
use crate::domain::{DeviceKind, DeviceProfile, LatencyModel};

/// A synthetic device that services a batch admitted at in-flight count `C`
/// in `alpha * C + beta` seconds, plus one-sided Gaussian jitter when the
/// profile carries a noise term. With `noise_stddev = 0` the device is
/// exactly its latency line.
#[derive(Debug, Clone)]
pub struct SimulatedDevice {
    profile: DeviceProfile,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    /// Fraction of batches stretched to 3x their latency, for reproducing
    /// outlier-heavy devices in fitting experiments.
    outlier_fraction: f64,
}

fn seed_for(name: &str, seed: u64) -> u64 {
    // FNV-1a over the device name keeps per-device streams independent while
    // staying stable across runs.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ seed
}

impl SimulatedDevice {
    pub fn new(profile: DeviceProfile, seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(seed_for(&profile.name, seed));
        let noise = (profile.noise_stddev > 0.0)
            .then(|| Normal::new(0.0, profile.noise_stddev).expect("validated stddev"));
        Self {
            profile,
            rng,
            noise,
            outlier_fraction: 0.0,
        }
    }

    /// Anonymous device straight from a latency line, for probing and CLI use.
    pub fn from_line(model: LatencyModel, noise_stddev: f64, seed: u64) -> Self {
        let profile = DeviceProfile::new("probe", DeviceKind::Accelerator, model, 1, noise_stddev)
            .expect("probe profile");
        Self::new(profile, seed)
    }

    pub fn with_outliers(mut self, fraction: f64) -> Self {
        self.outlier_fraction = fraction.clamp(0.0, 1.0);
        self
    }

    pub fn profile(&self) -> &DeviceProfile {
        &self.profile
    }

    /// Service latency of a batch admitted when the in-flight count became
    /// `in_flight`. Jitter is one-sided (contention only ever adds time).
    pub fn sample_latency(&mut self, in_flight: u32) -> f64 {
        let mut latency = self.profile.latency.predict(in_flight);
        if let Some(noise) = &self.noise {
            latency += noise.sample(&mut self.rng).abs();
        }
        if self.outlier_fraction > 0.0 && self.rng.gen::<f64>() < self.outlier_fraction {
            latency *= 3.0;
        }
        latency
    }
}

impl DeviceProbe for SimulatedDevice {
    fn measure_closed_loop(&mut self, concurrency: u32) -> f64 {
        self.sample_latency(concurrency)
    }
}

/// Runs one closed-loop batch per requested concurrency level and records the
/// measured mean latency, producing samples ready for fitting.
pub fn measure_latency_curve(
    device: &mut SimulatedDevice,
    concurrencies: &[u32],
) -> Vec<ProfilingSample> {
    concurrencies
        .iter()
        .map(|&c| ProfilingSample {
            concurrency: c,
            observed_latency_s: device.measure_closed_loop(c),
        })
        .collect()
}

/// Effective CPU slope when offload workers get `cores` of the `ref_cores`
/// the line was calibrated on. Compute scales inversely with cores up to
/// `knee_cores`; past the knee, host memory bandwidth stops further gains.
pub fn cpu_alpha_for_cores(alpha_ref: f64, ref_cores: u32, cores: u32, knee_cores: u32) -> f64 {
    assert!(ref_cores >= 1 && cores >= 1 && knee_cores >= 1);
    alpha_ref * ref_cores as f64 / cores.min(knee_cores) as f64
}
