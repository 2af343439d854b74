use super::{FockBasisState, Polarization, Port, PureState};

/// A detector collecting every photon of a port, optionally of a single
/// polarization. Temporal bins are never resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detector {
    pub port: Port,
    pub polarization: Option<Polarization>,
}

impl Detector {
    pub const fn port(port: Port) -> Self {
        Detector {
            port,
            polarization: None,
        }
    }

    pub const fn mode(port: Port, polarization: Polarization) -> Self {
        Detector {
            port,
            polarization: Some(polarization),
        }
    }

    pub fn count(&self, basis: &FockBasisState) -> u32 {
        basis
            .iter()
            .filter(|(m, _)| {
                m.port == self.port && self.polarization.is_none_or(|p| p == m.polarization)
            })
            .map(|(_, n)| n)
            .sum()
    }
}

/// Post-selection predicate: every listed detector sees exactly its count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionPattern {
    requirements: Vec<(Detector, u32)>,
}

impl DetectionPattern {
    pub fn new(requirements: Vec<(Detector, u32)>) -> Self {
        DetectionPattern { requirements }
    }

    /// Exactly one photon at each detector.
    pub fn coincidence(detectors: &[Detector]) -> Self {
        Self::new(detectors.iter().map(|d| (*d, 1)).collect())
    }

    pub fn requirements(&self) -> &[(Detector, u32)] {
        &self.requirements
    }

    pub fn matches(&self, basis: &FockBasisState) -> bool {
        self.requirements.iter().all(|(d, n)| d.count(basis) == *n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Postselection {
    pub probability: f64,
    /// Renormalized conditional state; `None` when the outcome is impossible.
    pub state: Option<PureState>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Mode;
    use num_complex::Complex64;

    #[test]
    fn vacuum_never_fires_a_coincidence() {
        let pattern = DetectionPattern::coincidence(&[
            Detector::port(Port::C1),
            Detector::port(Port::C2),
            Detector::port(Port::D1),
            Detector::port(Port::D2),
        ]);
        let r = PureState::vacuum().postselect(&pattern);
        assert_eq!(r.probability, 0.0);
        assert!(r.state.is_none());
    }

    #[test]
    fn detector_sums_bins_and_filters_polarization() {
        let basis = FockBasisState::from_modes([
            Mode::in_bin(Port::C, Polarization::H, 0),
            Mode::in_bin(Port::C, Polarization::H, 1),
            Mode::v(Port::C),
        ]);
        assert_eq!(Detector::mode(Port::C, Polarization::H).count(&basis), 2);
        assert_eq!(Detector::port(Port::C).count(&basis), 3);
        assert_eq!(Detector::port(Port::D).count(&basis), 0);
    }

    #[test]
    fn conditional_state_is_renormalized() {
        let one = FockBasisState::from_modes([Mode::h(Port::C)]);
        let other = FockBasisState::from_modes([Mode::v(Port::C)]);
        let s = PureState::from_terms([
            (one.clone(), Complex64::new(0.6, 0.0)),
            (other, Complex64::new(0.8, 0.0)),
        ])
        .unwrap();
        let r = s.postselect(&DetectionPattern::coincidence(&[Detector::mode(Port::C, Polarization::H)]));
        assert!((r.probability - 0.36).abs() < 1e-12);
        let cond = r.state.unwrap();
        assert!((cond.coefficient(&one).re - 1.0).abs() < 1e-12);
    }
}
