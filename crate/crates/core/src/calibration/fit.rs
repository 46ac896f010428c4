use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, LatencyModel};

/// One profiling observation: mean processing latency at a held concurrency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilingSample {
    pub concurrency: u32,
    pub observed_latency_s: f64,
}

impl ProfilingSample {
    pub fn new(concurrency: u32, observed_latency_s: f64) -> Result<Self, DomainError> {
        if concurrency == 0 {
            return Err(DomainError::ZeroCount {
                field: "concurrency",
                value: 0,
            });
        }
        if !(observed_latency_s.is_finite() && observed_latency_s > 0.0) {
            return Err(DomainError::NonPositive {
                field: "observed_latency_s",
                value: observed_latency_s,
            });
        }
        Ok(Self {
            concurrency,
            observed_latency_s,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("all samples share one concurrency level; need at least 2 distinct levels")]
    DegenerateSamples,
    #[error("csv ingestion failed: {0}")]
    Csv(String),
    #[error("invalid sample: {0}")]
    Sample(#[from] DomainError),
}

/// Fitted latency line plus fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: LatencyModel,
    /// Coefficient of determination against the samples, clamped to [0, 1].
    pub r_squared: f64,
    pub sample_count: usize,
    /// Set when a negative fitted coefficient was clamped to 0.
    pub clamped: bool,
    /// Standard error of the slope; 0 when the fit has no residual degrees
    /// of freedom.
    pub alpha_stderr: f64,
}

/// Ordinary least squares over (concurrency, latency) pairs.
///
/// A negative fitted slope or intercept is clamped to 0 and the remaining
/// coefficient refit under that constraint, with `clamped` flagged so callers
/// can treat the device's linearity claim with suspicion.
pub fn fit_latency_model(samples: &[ProfilingSample]) -> Result<FitResult, FitError> {
    if samples.len() < 2 {
        return Err(FitError::InsufficientSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let first = samples[0].concurrency;
    if samples.iter().all(|s| s.concurrency == first) {
        return Err(FitError::DegenerateSamples);
    }

    let mean_c = samples.iter().map(|s| s.concurrency as f64).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.observed_latency_s).sum::<f64>() / n;
    let mut s_cc = 0.0;
    let mut s_cy = 0.0;
    for s in samples {
        let dc = s.concurrency as f64 - mean_c;
        s_cc += dc * dc;
        s_cy += dc * (s.observed_latency_s - mean_y);
    }

    let mut alpha = s_cy / s_cc;
    let mut beta = mean_y - alpha * mean_c;
    let mut clamped = false;
    if alpha < 0.0 {
        // Best non-negative-slope fit is the flat line through the mean.
        alpha = 0.0;
        beta = mean_y;
        clamped = true;
    } else if beta < 0.0 {
        // Refit through the origin.
        beta = 0.0;
        let s2: f64 = samples.iter().map(|s| (s.concurrency as f64).powi(2)).sum();
        let scy: f64 = samples
            .iter()
            .map(|s| s.concurrency as f64 * s.observed_latency_s)
            .sum();
        alpha = (scy / s2).max(0.0);
        clamped = true;
    }

    let model = LatencyModel { alpha, beta };
    let ss_res: f64 = samples
        .iter()
        .map(|s| {
            let r = s.observed_latency_s - model.predict(s.concurrency);
            r * r
        })
        .sum();
    let ss_tot: f64 = samples
        .iter()
        .map(|s| {
            let d = s.observed_latency_s - mean_y;
            d * d
        })
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * n {
        if ss_res <= f64::EPSILON * n {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };

    let alpha_stderr = if samples.len() > 2 && s_cc > 0.0 {
        let sigma2 = ss_res / (n - 2.0);
        (sigma2 / s_cc).sqrt()
    } else {
        0.0
    };

    Ok(FitResult {
        model,
        r_squared,
        sample_count: samples.len(),
        clamped,
        alpha_stderr,
    })
}

/// Reads profiling samples from CSV with the header `concurrency,latency_s`.
pub fn samples_from_csv<R: Read>(reader: R) -> Result<Vec<ProfilingSample>, FitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| FitError::Csv(e.to_string()))?;
        let expected = ["concurrency", "latency_s"];
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(FitError::Csv(format!(
                "expected header {expected:?}, got {got:?}"
            )));
        }
    }
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| FitError::Csv(e.to_string()))?;
        let concurrency: u32 = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e| FitError::Csv(format!("bad concurrency: {e}")))?;
        let latency: f64 = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|e| FitError::Csv(format!("bad latency_s: {e}")))?;
        samples.push(ProfilingSample::new(concurrency, latency)?);
    }
    Ok(samples)
}

pub fn samples_from_csv_path(path: &Path) -> Result<Vec<ProfilingSample>, FitError> {
    let file = std::fs::File::open(path).map_err(|e| FitError::Csv(e.to_string()))?;
    samples_from_csv(file)
}
