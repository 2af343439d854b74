use serde::{Deserialize, Serialize};

use super::{HarnessError, ScanKind, ScanResult};
use crate::projection::analytic_a4f_continuous;

/// Fit of `R(δ) = A·|A4f(θ, δ)|² + C` and the contrast of the fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    pub visibility: f64,
    pub uncertainty: f64,
    pub amplitude: f64,
    pub offset: f64,
}

const MIN_POINTS: usize = 5;

/// Extremes of `|A4f(θ, δ)|²` over one period of δ.
///
/// `|A4f|² = (sin²4θ·cos δ + cos²4θ)² / 3`, so the maximum is always 1/3 and
/// the minimum is zero whenever `sin²4θ ≥ cos²4θ`.
pub fn model_extremes(theta: f64) -> (f64, f64) {
    let (s, c) = (4.0 * theta).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let max = (s2 + c2).powi(2).max((c2 - s2).powi(2)) / 3.0;
    let min = if c2 <= s2 { 0.0 } else { (c2 - s2).powi(2) / 3.0 };
    (min, max)
}

/// Weighted linear least squares of the scan against the analytic model.
///
/// Counts are used when every point carries them (weights `1/max(N, 1)`),
/// otherwise the bare probabilities with a residual-based variance.
pub fn estimate_visibility(result: &ScanResult) -> Result<Visibility, HarnessError> {
    let spec = &result.spec;
    let setting = &spec.setting;
    if spec.kind != ScanKind::Delta
        || (setting.theta1 - setting.theta2).abs() > 1e-12
        || setting.overlap != 1.0
    {
        return Err(HarnessError::UnsupportedScan);
    }
    let n = result.points.len();
    if n < MIN_POINTS {
        return Err(HarnessError::InsufficientData {
            needed: MIN_POINTS,
            got: n,
        });
    }
    let theta = setting.theta1;
    let model: Vec<f64> = result
        .points
        .iter()
        .map(|p| analytic_a4f_continuous(theta, p.parameter + setting.pre_pbs_phase).norm_sqr())
        .collect();
    let use_counts = result.has_counts();
    let data: Vec<f64> = result
        .points
        .iter()
        .map(|p| match (use_counts, p.counts) {
            (true, Some(c)) => c as f64,
            _ => p.probability,
        })
        .collect();
    let weights: Vec<f64> = if use_counts {
        data.iter().map(|y| 1.0 / y.max(1.0)).collect()
    } else {
        vec![1.0; n]
    };

    let (fmin_grid, fmax_grid) = model
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    if fmax_grid - fmin_grid <= 1e-9 * fmax_grid.abs().max(1e-300) {
        return Err(HarnessError::FitDegenerate);
    }

    // normal equations for (A, C)
    let (mut sww, mut swf, mut swff, mut swy, mut swfy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((f, y), w) in model.iter().zip(&data).zip(&weights) {
        sww += w;
        swf += w * f;
        swff += w * f * f;
        swy += w * y;
        swfy += w * f * y;
    }
    let det = swff * sww - swf * swf;
    if !(det > 1e-14 * swff * sww) {
        return Err(HarnessError::FitDegenerate);
    }
    let amplitude = (sww * swfy - swf * swy) / det;
    let offset = (swff * swy - swf * swfy) / det;

    let scale = if use_counts {
        1.0
    } else {
        let rss: f64 = model
            .iter()
            .zip(&data)
            .map(|(f, y)| (y - amplitude * f - offset).powi(2))
            .sum();
        rss / (n - 2) as f64
    };
    let var_a = scale * sww / det;
    let var_c = scale * swff / det;
    let cov_ac = -scale * swf / det;

    let (fmin, fmax) = model_extremes(theta);
    let span = fmax - fmin;
    let num = amplitude.abs() * span;
    let den = amplitude * (fmax + fmin) + 2.0 * offset;
    if !(den.abs() > 0.0) {
        return Err(HarnessError::FitDegenerate);
    }
    let visibility = num / den;
    let d_a = amplitude.signum() * span / den - num * (fmax + fmin) / (den * den);
    let d_c = -2.0 * num / (den * den);
    let variance = d_a * d_a * var_a + d_c * d_c * var_c + 2.0 * d_a * d_c * cov_ac;
    Ok(Visibility {
        visibility,
        uncertainty: variance.max(0.0).sqrt(),
        amplitude,
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_scan, simulate_counts, RateModel, ScanSpec};
    use crate::projection::{magic_angle, ProjectionSetting};
    use crate::states::NamedState;
    use std::f64::consts::{FRAC_PI_8, PI};

    fn delta_scan(theta: f64, points: usize) -> ScanResult {
        let grid = (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect();
        run_scan(&ScanSpec {
            kind: ScanKind::Delta,
            grid,
            setting: ProjectionSetting::new(theta, theta),
            source: NamedState::Phi2 { delta: 0.0 },
            coherence_sigma: None,
        })
        .unwrap()
    }

    #[test]
    fn extremes_match_dense_sampling() {
        for theta in [0.0, 0.05, 0.1, magic_angle(), FRAC_PI_8, 0.5] {
            let (lo, hi) = model_extremes(theta);
            let samples: Vec<f64> = (0..=20000)
                .map(|k| analytic_a4f_continuous(theta, 2.0 * PI * k as f64 / 20000.0).norm_sqr())
                .collect();
            let smin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let smax = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((hi - smax).abs() < 1e-9, "theta {theta}");
            assert!((lo - smin).abs() < 1e-6, "theta {theta}: {lo} vs {smin}");
        }
    }

    #[test]
    fn noiseless_full_contrast() {
        let v = estimate_visibility(&delta_scan(FRAC_PI_8, 36)).unwrap();
        assert!((v.visibility - 1.0).abs() < 1e-9);
        assert!(v.uncertainty < 1e-9);
        assert!((v.amplitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_scan_is_degenerate() {
        let err = estimate_visibility(&delta_scan(0.0, 36)).unwrap_err();
        assert!(matches!(err, HarnessError::FitDegenerate));
    }

    #[test]
    fn too_few_points() {
        let err = estimate_visibility(&delta_scan(FRAC_PI_8, 4)).unwrap_err();
        assert!(matches!(err, HarnessError::InsufficientData { needed: 5, got: 4 }));
    }

    #[test]
    fn background_lowers_contrast() {
        let noiseless = delta_scan(magic_angle(), 36);
        let model = RateModel::new(4.89, 0.5).unwrap();
        let counts = simulate_counts(&noiseless, &model, 1e6, 5).unwrap();
        let v = estimate_visibility(&counts).unwrap();
        // fitted offset recovers background·T, contrast 1.63/(1.63 + 2·0.5)
        let expected = 1.63 / (1.63 + 1.0);
        assert!((v.visibility - expected).abs() < 5.0 * v.uncertainty + 1e-3, "{v:?}");
    }
}
