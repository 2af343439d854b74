use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{HarnessError, RateModel, ScanKind, ScanResult, ScanSpec};

#[derive(Serialize)]
struct CsvRow {
    parameter: f64,
    probability: f64,
    rate_hz: Option<f64>,
    counts: Option<u64>,
    sigma_counts: Option<f64>,
}

/// Plot-ready CSV; delta scans report the parameter in degrees. Columns
/// without simulated counts are left empty.
pub fn write_csv<W: Write>(result: &ScanResult, out: W) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(out);
    for p in &result.points {
        let parameter = match result.spec.kind {
            ScanKind::Delta => p.parameter.to_degrees(),
            _ => p.parameter,
        };
        writer.serialize(CsvRow {
            parameter,
            probability: p.probability,
            rate_hz: p.rate_hz,
            counts: p.counts,
            sigma_counts: p.sigma_counts,
        })?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(result: &ScanResult, mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, result)?;
    writeln!(out)?;
    Ok(())
}

/// Provenance record written next to every scan output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub spec: ScanSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<RateModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ScanPoint;
    use crate::projection::ProjectionSetting;
    use crate::states::NamedState;

    #[test]
    fn csv_layout() {
        let result = ScanResult {
            spec: ScanSpec {
                kind: ScanKind::Delta,
                grid: vec![0.0, std::f64::consts::PI],
                setting: ProjectionSetting::magic(),
                source: NamedState::Phi2 { delta: 0.0 },
                coherence_sigma: None,
            },
            points: vec![
                ScanPoint { parameter: 0.0, probability: 0.25, rate_hz: None, counts: None, sigma_counts: None },
                ScanPoint {
                    parameter: std::f64::consts::PI,
                    probability: 0.5,
                    rate_hz: Some(2.0),
                    counts: Some(4),
                    sigma_counts: Some(2.0),
                },
            ],
        };
        let mut buf = Vec::new();
        write_csv(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "parameter,probability,rate_hz,counts,sigma_counts\n0.0,0.25,,,\n180.0,0.5,2.0,4,2.0\n"
        );
    }
}
