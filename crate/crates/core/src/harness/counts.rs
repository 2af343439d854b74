use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, ScanResult};

/// Maps probabilities to detection rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    /// Rate in Hz per unit fourfold probability.
    pub peak_rate_scale: f64,
    /// State-independent rate added to every point (Hz).
    pub background_rate: f64,
}

impl RateModel {
    pub fn new(peak_rate_scale: f64, background_rate: f64) -> Result<Self, HarnessError> {
        let model = RateModel {
            peak_rate_scale,
            background_rate,
        };
        model.validate()?;
        Ok(model)
    }

    /// Scale chosen so that `probability` produces `rate_hz`.
    pub fn calibrated(probability: f64, rate_hz: f64, background_rate: f64) -> Result<Self, HarnessError> {
        if !(probability > 0.0) {
            return Err(HarnessError::InvalidModel("calibration probability must be positive".into()));
        }
        Self::new(rate_hz / probability, background_rate)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        for (name, v) in [("peak_rate_scale", self.peak_rate_scale), ("background_rate", self.background_rate)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(HarnessError::InvalidModel(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn rate(&self, probability: f64) -> f64 {
        probability * self.peak_rate_scale + self.background_rate
    }
}

/// Poisson counts for every point of a scan.
///
/// Point `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so the
/// result does not depend on how points are scheduled.
pub fn simulate_counts(
    result: &ScanResult,
    model: &RateModel,
    integration_seconds: f64,
    seed: u64,
) -> Result<ScanResult, HarnessError> {
    model.validate()?;
    if !(integration_seconds.is_finite() && integration_seconds >= 0.0) {
        return Err(HarnessError::InvalidModel(format!(
            "integration time must be finite and non-negative, got {integration_seconds}"
        )));
    }
    let points = result
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let rate = model.rate(p.probability);
            let mean = rate * integration_seconds;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let counts = if mean > 0.0 {
                let dist = Poisson::new(mean)
                    .map_err(|e| HarnessError::InvalidModel(format!("Poisson mean {mean}: {e}")))?;
                dist.sample(&mut rng) as u64
            } else {
                0
            };
            let mut point = p.clone();
            point.rate_hz = Some(rate);
            point.counts = Some(counts);
            point.sigma_counts = Some((counts as f64).sqrt());
            Ok(point)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(ScanResult {
        spec: result.spec.clone(),
        points,
    })
}
