//! Named states: polarization biphoton qutrits, the nine-element maximally
//! entangled two-qutrit basis and the second-order down-conversion state.
//!
//! Logical qutrit levels map to biphotons as `|0⟩ = a_h†²/√2`,
//! `|1⟩ = a_h† a_v†`, `|2⟩ = a_v†²/√2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockBasisState, FockError, Mode, Port, PureState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("qutrit amplitudes are not normalized (norm² = {0})")]
    Unnormalized(f64),
    #[error("Bell index ({0}, {1}) out of range")]
    InvalidIndex(u8, u8),
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Third root of unity `exp(2πi/3)`, evaluated once.
pub fn tau() -> Complex64 {
    static TAU: OnceLock<Complex64> = OnceLock::new();
    *TAU.get_or_init(|| Complex64::from_polar(1.0, 2.0 * PI / 3.0))
}

/// `τ^k` by repeated multiplication of [`tau`], `k` reduced mod 3.
pub fn tau_pow(k: u32) -> Complex64 {
    (0..k % 3).fold(Complex64::new(1.0, 0.0), |acc, _| acc * tau())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritAmplitudes {
    pub alpha0: Complex64,
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl QutritAmplitudes {
    pub fn new(alpha0: Complex64, alpha1: Complex64, alpha2: Complex64) -> Self {
        QutritAmplitudes { alpha0, alpha1, alpha2 }
    }

    pub fn real(a0: f64, a1: f64, a2: f64) -> Self {
        Self::new(a0.into(), a1.into(), a2.into())
    }

    /// The basis vector `|level⟩`.
    pub fn level(level: usize) -> Self {
        let mut a = [Complex64::default(); 3];
        a[level % 3] = Complex64::new(1.0, 0.0);
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha0.norm_sqr() + self.alpha1.norm_sqr() + self.alpha2.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self, StateError> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(FockError::ZeroState.into());
        }
        Ok(Self::new(self.alpha0 / n, self.alpha1 / n, self.alpha2 / n))
    }

    fn as_array(&self) -> [Complex64; 3] {
        [self.alpha0, self.alpha1, self.alpha2]
    }
}

/// Index `(m, n)` of a generalized Bell state, both in `{0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BellIndex {
    m: u8,
    n: u8,
}

impl BellIndex {
    pub fn new(m: u8, n: u8) -> Result<Self, StateError> {
        if m > 2 || n > 2 {
            return Err(StateError::InvalidIndex(m, n));
        }
        Ok(BellIndex { m, n })
    }

    pub fn m(self) -> u8 {
        self.m
    }

    pub fn n(self) -> u8 {
        self.n
    }

    pub fn all() -> impl Iterator<Item = BellIndex> {
        (0..3).flat_map(|m| (0..3).map(move |n| BellIndex { m, n }))
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi{}{}", self.m, self.n)
    }
}

impl FromStr for BellIndex {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || StateError::UnknownState(s.to_string());
        let digits = s.strip_prefix("psi").ok_or_else(unknown)?.as_bytes();
        match digits {
            [m @ b'0'..=b'2', n @ b'0'..=b'2'] => BellIndex::new(m - b'0', n - b'0'),
            _ => Err(unknown()),
        }
    }
}

/// Monomials of the three logical levels in `port`, with the coefficients
/// that make each level unit-norm.
fn level_terms(port: Port) -> [(FockBasisState, f64); 3] {
    let h = Mode::h(port);
    let v = Mode::v(port);
    [
        (FockBasisState::from_occupations([(h, 2)]), FRAC_1_SQRT_2),
        (FockBasisState::from_modes([h, v]), 1.0),
        (FockBasisState::from_occupations([(v, 2)]), FRAC_1_SQRT_2),
    ]
}

/// `(α0·a_h†²/√2 + α1·a_h†a_v† + α2·a_v†²/√2)|vac⟩`.
pub fn biphoton_qutrit(amps: QutritAmplitudes, port: Port) -> Result<PureState, StateError> {
    let norm = amps.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(StateError::Unnormalized(norm));
    }
    let state = PureState::from_terms(
        level_terms(port)
            .into_iter()
            .zip(amps.as_array())
            .map(|((b, k), alpha)| (b, alpha * k)),
    )?;
    Ok(state.normalize()?)
}

/// `|ψ_mn⟩ = (1/√3) Σ_j τ^{jn} |j⟩_a ⊗ |(j+m) mod 3⟩_b`.
pub fn bell_state(idx: BellIndex) -> PureState {
    let a = level_terms(Port::A);
    let b = level_terms(Port::B);
    let scale = 1.0 / 3f64.sqrt();
    let terms = (0..3usize).map(|j| {
        let (ba, ka) = &a[j];
        let (bb, kb) = &b[(j + idx.m as usize) % 3];
        let monomial = FockBasisState::from_occupations(ba.iter().chain(bb.iter()));
        let phase = tau_pow(j as u32 * idx.n as u32);
        (monomial, phase * (scale * ka * kb))
    });
    PureState::from_terms(terms).expect("Bell-basis monomials all carry four photons")
}

/// Second-order down-conversion state with a birefringent phase `δ`:
/// `(1/√12)(a_h†²b_h†² + 2e^{iδ} a_h†a_v†b_h†b_v† + e^{2iδ} a_v†²b_v†²)|vac⟩`.
pub fn spdc_second_order(delta: f64) -> PureState {
    let (ah, av, bh, bv) = (Mode::h(Port::A), Mode::v(Port::A), Mode::h(Port::B), Mode::v(Port::B));
    let k = 1.0 / 12f64.sqrt();
    let phase = Complex64::from_polar(1.0, delta);
    PureState::from_terms([
        (FockBasisState::from_occupations([(ah, 2), (bh, 2)]), Complex64::new(k, 0.0)),
        (FockBasisState::from_modes([ah, av, bh, bv]), phase * (2.0 * k)),
        (FockBasisState::from_occupations([(av, 2), (bv, 2)]), phase * phase * k),
    ])
    .expect("down-conversion monomials all carry four photons")
}

/// A state reference accepted by lookups: `psiMN` or the down-conversion
/// state at a given `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedState {
    Bell { index: BellIndex },
    Phi2 { delta: f64 },
}

impl NamedState {
    /// Parses `psi00`..`psi22` or `phi2`; `delta` (radians) applies to `phi2`.
    pub fn parse(name: &str, delta: f64) -> Result<Self, StateError> {
        if name == "phi2" {
            return Ok(NamedState::Phi2 { delta });
        }
        Ok(NamedState::Bell { index: name.parse()? })
    }

    pub fn build(&self) -> PureState {
        match *self {
            NamedState::Bell { index } => bell_state(index),
            NamedState::Phi2 { delta } => spdc_second_order(delta),
        }
    }

    pub fn name(&self) -> String {
        match self {
            NamedState::Bell { index } => index.to_string(),
            NamedState::Phi2 { .. } => "phi2".to_string(),
        }
    }
}

/// The Bell state equal to `state` up to global phase, if any.
pub fn identify_bell_state(state: &PureState, tolerance: f64) -> Option<BellIndex> {
    BellIndex::all().find(|&idx| bell_state(idx).approx_eq_up_to_phase(state, tolerance))
}
