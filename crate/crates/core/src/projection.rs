//! Fourfold-coincidence projection of two biphotons.
//!
//! The standard stage: an optional temporal offset on arm `b`, an optional
//! retarder on arm `a`, the overlapping PBS `(a, b) → (c, d)` followed by a
//! fixed π retarder on `c` that cancels the phase the two reflected V photons
//! pick up, half-wave plates `θ1` on `c` and `θ2` on `d`, and one analysis PBS
//! per arm feeding four single-photon detectors.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{
    DetectionPattern, Detector, Ensemble, FockBasisState, FockError, Mode, ModeTransform,
    Polarization, Port, PureState,
};
use crate::optics::{self, Circuit, Element, OpticsError};
use crate::states::{bell_state, tau_pow, BellIndex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("no second angle: tan 4θ1 = {tan:.3e} leaves tan 4θ1 · tan 4θ2 = 2 without a regular solution")]
    NoSolution { tan: f64 },
    #[error("overlap {0} outside [0, 1]")]
    InvalidOverlap(f64),
    #[error("expected a four-photon state in arms a and b")]
    NotTwoBiphotons,
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Equal wave-plate angle with `tan² 4θ = 2`, i.e. `atan(√2)/4 ≈ 13.68°`.
pub fn magic_angle() -> f64 {
    2f64.sqrt().atan() / 4.0
}

/// Free parameters of the projection stage (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSetting {
    pub theta1: f64,
    pub theta2: f64,
    /// Retardance added to arm `a` ahead of the PBS.
    pub pre_pbs_phase: f64,
    /// Temporal overlap γ of arm `b` with arm `a`.
    pub overlap: f64,
}

impl ProjectionSetting {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        ProjectionSetting {
            theta1,
            theta2,
            pre_pbs_phase: 0.0,
            overlap: 1.0,
        }
    }

    /// Both plates at the magic angle, no offsets.
    pub fn magic() -> Self {
        Self::new(magic_angle(), magic_angle())
    }

    pub fn with_pre_phase(mut self, phase: f64) -> Self {
        self.pre_pbs_phase = phase;
        self
    }

    pub fn with_overlap(mut self, gamma: f64) -> Self {
        self.overlap = gamma;
        self
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(ProjectionError::InvalidOverlap(self.overlap));
        }
        Ok(())
    }
}

/// Amplitude and probability of the fourfold outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A4fResult {
    pub amplitude: Complex64,
    pub probability: f64,
}

/// Closed-form fourfold amplitude for equal plates:
/// `(1/√12)(sin²4θ + 2τⁿcos²4θ + τ²ⁿsin²4θ)`.
pub fn analytic_a4f(theta: f64, n: u8) -> Complex64 {
    let (s, c) = (4.0 * theta).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let n = n as u32;
    (s2 + tau_pow(n) * (2.0 * c2) + tau_pow(2 * n) * s2) / 12f64.sqrt()
}

/// [`analytic_a4f`] with `τⁿ` replaced by the continuous phase `e^{iδ}`.
pub fn analytic_a4f_continuous(theta: f64, delta: f64) -> Complex64 {
    let (s, c) = (4.0 * theta).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let p = Complex64::from_polar(1.0, delta);
    (s2 + p * (2.0 * c2) + p * p * s2) / 12f64.sqrt()
}

pub fn analytic_result(theta: f64, n: u8) -> A4fResult {
    let amplitude = analytic_a4f(theta, n);
    A4fResult {
        amplitude,
        probability: amplitude.norm_sqr(),
    }
}

/// Smallest positive `θ2` with `tan 4θ1 · tan 4θ2 = 2`.
///
/// Fails where `tan 4θ1` vanishes or diverges; those settings are handled by
/// propagation only.
pub fn solve_second_angle(theta1: f64) -> Result<f64, ProjectionError> {
    let (s, c) = (4.0 * theta1).sin_cos();
    if s.abs() < 1e-12 || c.abs() < 1e-12 {
        return Err(ProjectionError::NoSolution { tan: s / c });
    }
    let theta2 = (2.0 * c / s).atan() / 4.0;
    Ok(if theta2 > 0.0 { theta2 } else { theta2 + PI / 4.0 })
}

/// Detectors behind the analysis PBSs: transmitted H and reflected V of each arm.
pub fn fourfold_detectors() -> [Detector; 4] {
    [
        Detector::mode(Port::C1, Polarization::H),
        Detector::mode(Port::C2, Polarization::V),
        Detector::mode(Port::D1, Polarization::H),
        Detector::mode(Port::D2, Polarization::V),
    ]
}

/// One photon at each of the four detectors, either temporal bin.
pub fn fourfold_pattern() -> DetectionPattern {
    DetectionPattern::coincidence(&fourfold_detectors())
}

/// Two photons at each output of the overlapping PBS.
pub fn two_by_two_pattern() -> DetectionPattern {
    DetectionPattern::new(vec![(Detector::port(Port::C), 2), (Detector::port(Port::D), 2)])
}

/// The standard projection stage with an optionally leaky first PBS.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    setting: ProjectionSetting,
    reflect_h: f64,
    reflect_v: f64,
}

impl Projector {
    pub fn new(setting: ProjectionSetting) -> Self {
        Projector {
            setting,
            reflect_h: 0.0,
            reflect_v: 1.0,
        }
    }

    /// Replaces the overlapping PBS reflectivities; the analysis PBSs stay ideal.
    pub fn with_pbs(mut self, reflect_h: f64, reflect_v: f64) -> Self {
        self.reflect_h = reflect_h;
        self.reflect_v = reflect_v;
        self
    }

    pub fn setting(&self) -> &ProjectionSetting {
        &self.setting
    }

    /// Elements up to and including the wave plates.
    pub fn front_circuit(&self) -> Circuit {
        let s = &self.setting;
        Circuit::new("overlap, PBS, compensation, wave plates")
            .with(Element::TemporalOverlap { port: Port::B, gamma: s.overlap })
            .with(Element::BirefringentPhase { port: Port::A, delta: s.pre_pbs_phase })
            .with(Element::PolarizingBeamSplitter {
                in_a: Port::A,
                in_b: Port::B,
                out_c: Port::C,
                out_d: Port::D,
                reflect_h: self.reflect_h,
                reflect_v: self.reflect_v,
            })
            .with(Element::BirefringentPhase { port: Port::C, delta: PI })
            .with(Element::HalfWavePlate { port: Port::C, theta: s.theta1 })
            .with(Element::HalfWavePlate { port: Port::D, theta: s.theta2 })
    }

    pub fn circuit(&self) -> Circuit {
        let mut c = self.front_circuit();
        c.label = "biphoton projection stage".into();
        c.with(Element::PolarizingBeamSplitter {
            in_a: Port::C,
            in_b: Port::AuxC,
            out_c: Port::C1,
            out_d: Port::C2,
            reflect_h: 0.0,
            reflect_v: 1.0,
        })
        .with(Element::PolarizingBeamSplitter {
            in_a: Port::D,
            in_b: Port::AuxD,
            out_c: Port::D1,
            out_d: Port::D2,
            reflect_h: 0.0,
            reflect_v: 1.0,
        })
    }

    fn check_input(state: &PureState) -> Result<(), ProjectionError> {
        let in_arms = state
            .modes()
            .iter()
            .all(|m| matches!(m.port, Port::A | Port::B));
        if state.photon_number() != Some(4) || !in_arms {
            return Err(ProjectionError::NotTwoBiphotons);
        }
        Ok(())
    }

    /// State at the detectors.
    pub fn propagate(&self, state: &PureState) -> Result<PureState, ProjectionError> {
        self.setting.validate()?;
        Self::check_input(state)?;
        Ok(self.circuit().apply(state)?)
    }

    /// Probability of the fourfold coincidence.
    pub fn probability(&self, state: &PureState) -> Result<f64, ProjectionError> {
        Ok(self.propagate(state)?.postselect(&fourfold_pattern()).probability)
    }

    /// Weighted fourfold probability of a mixture.
    pub fn ensemble_probability(&self, ensemble: &Ensemble) -> Result<f64, ProjectionError> {
        ensemble
            .components()
            .iter()
            .map(|(w, s)| Ok(w * self.probability(s)?))
            .sum()
    }

    /// Coefficient of `c_h† c_v† d_h† d_v†` right after the wave plates, the
    /// term that splits into one photon per detector. Meaningful for
    /// indistinguishable photons (γ = 1).
    pub fn fourfold_amplitude(&self, state: &PureState) -> Result<Complex64, ProjectionError> {
        self.setting.validate()?;
        Self::check_input(state)?;
        let out = self.front_circuit().apply(state)?;
        let target = FockBasisState::from_modes([
            Mode::h(Port::C),
            Mode::v(Port::C),
            Mode::h(Port::D),
            Mode::v(Port::D),
        ]);
        Ok(out.coefficient(&target))
    }

    /// Probabilities of the nine two-photons-per-arm classes: entry `[i][j]`
    /// has `i` H photons in arm `c` and `j` H photons in arm `d`, V making up
    /// the rest. Entry `[1][1]` is the fourfold coincidence.
    pub fn outcome_classes(&self, state: &PureState) -> Result<[[f64; 3]; 3], ProjectionError> {
        let out = self.propagate(state)?;
        let mut classes = [[0.0; 3]; 3];
        for (i, row) in classes.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                let i = i as u32;
                let j = j as u32;
                let pattern = DetectionPattern::new(vec![
                    (Detector::mode(Port::C1, Polarization::H), i),
                    (Detector::mode(Port::C2, Polarization::V), 2 - i),
                    (Detector::mode(Port::D1, Polarization::H), j),
                    (Detector::mode(Port::D2, Polarization::V), 2 - j),
                ]);
                *p = out.postselect(&pattern).probability;
            }
        }
        Ok(classes)
    }
}

/// Fourfold probability of `state` through the ideal stage.
pub fn detection_probability(
    state: &PureState,
    setting: &ProjectionSetting,
) -> Result<f64, ProjectionError> {
    Projector::new(*setting).probability(state)
}

/// Weighted fourfold probability of a mixture through the ideal stage.
pub fn ensemble_detection_probability(
    ensemble: &Ensemble,
    setting: &ProjectionSetting,
) -> Result<f64, ProjectionError> {
    Projector::new(*setting).ensemble_probability(ensemble)
}

fn ideal_filter() -> &'static ModeTransform {
    static PBS: OnceLock<ModeTransform> = OnceLock::new();
    PBS.get_or_init(|| optics::ideal_pbs(Port::A, Port::B, Port::C, Port::D).expect("ideal PBS is unitary"))
}

/// Probability that the ideal PBS leaves two photons in each output.
pub fn family_filter_probability(state: &PureState) -> Result<f64, ProjectionError> {
    Projector::check_input(state)?;
    let out = state.apply_transform(ideal_filter())?;
    Ok(out.postselect(&two_by_two_pattern()).probability)
}

/// The six Bell states with `m ≠ 0`, none of which the ideal PBS splits 2+2.
pub fn rejected_families() -> Vec<PureState> {
    BellIndex::all()
        .filter(|i| i.m() != 0)
        .map(bell_state)
        .collect()
}

/// Fourfold probability for a uniform mixture of the `m ≠ 0` families when
/// the first PBS reflects a fraction `reflect_h` of H light.
pub fn family_leakage(reflect_h: f64, setting: &ProjectionSetting) -> Result<f64, ProjectionError> {
    let mixture = Ensemble::uniform(rejected_families())?;
    Projector::new(*setting)
        .with_pbs(reflect_h, 1.0)
        .ensemble_probability(&mixture)
}
