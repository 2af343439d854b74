use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::projection::{detection_probability, ProjectionSetting};
use crate::states::NamedState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    /// Grid values are the temporal overlap γ directly.
    Overlap,
    /// Grid values are path delays mapped to γ by [`gaussian_overlap`].
    Delay,
    /// Grid values are the source phase δ (radians).
    Delta,
}

/// What to scan. The scanned quantity overrides the matching field of
/// `setting` (or the source phase for delta scans).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub grid: Vec<f64>,
    pub setting: ProjectionSetting,
    pub source: NamedState,
    /// Delay at which the overlap falls to `e^{-1/2}`; delay scans only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_sigma: Option<f64>,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::InvalidSpec(msg.to_string()));
        if self.grid.is_empty() {
            return bad("grid is empty");
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return bad("grid values must be finite");
        }
        let rising = self.grid.windows(2).all(|w| w[1] > w[0]);
        let falling = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(rising || falling) {
            return bad("grid must be strictly monotone");
        }
        match self.kind {
            ScanKind::Overlap => {
                if self.grid.iter().any(|g| !(0.0..=1.0).contains(g)) {
                    return bad("overlap values must lie in [0, 1]");
                }
            }
            ScanKind::Delay => match self.coherence_sigma {
                Some(s) if s.is_finite() && s > 0.0 => {}
                _ => return bad("delay scans need a positive coherence_sigma"),
            },
            ScanKind::Delta => {
                if !matches!(self.source, NamedState::Phi2 { .. }) {
                    return bad("delta scans drive the phi2 source");
                }
            }
        }
        if self.kind != ScanKind::Overlap {
            self.setting.validate()?;
        }
        Ok(())
    }

    /// Setting and source state for grid value `x`.
    fn point(&self, x: f64) -> (ProjectionSetting, NamedState) {
        match self.kind {
            ScanKind::Overlap => (self.setting.with_overlap(x), self.source),
            ScanKind::Delay => {
                let sigma = self.coherence_sigma.unwrap_or(1.0);
                (self.setting.with_overlap(gaussian_overlap(x, sigma)), self.source)
            }
            ScanKind::Delta => (self.setting, NamedState::Phi2 { delta: x }),
        }
    }
}

/// `γ(d) = exp(−d² / 2σ²)`.
pub fn gaussian_overlap(delay: f64, sigma: f64) -> f64 {
    (-delay * delay / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub parameter: f64,
    pub probability: f64,
    pub rate_hz: Option<f64>,
    pub counts: Option<u64>,
    pub sigma_counts: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub spec: ScanSpec,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.probability).collect()
    }

    pub fn has_counts(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.counts.is_some())
    }
}

/// Theory curve: fourfold probability at every grid point.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult, HarnessError> {
    spec.validate()?;
    let points = spec
        .grid
        .par_iter()
        .map(|&x| {
            let (setting, source) = spec.point(x);
            let probability = detection_probability(&source.build(), &setting)?;
            Ok(ScanPoint {
                parameter: x,
                probability,
                rate_hz: None,
                counts: None,
                sigma_counts: None,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(ScanResult {
        spec: spec.clone(),
        points,
    })
}
