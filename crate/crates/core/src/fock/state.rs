use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    DetectionPattern, FockBasisState, FockError, Limits, Mode, ModeTransform, Polarization, Port,
    Postselection, PRUNE_THRESHOLD,
};

/// A finite superposition of Fock basis monomials with a common photon
/// number. Coefficients multiply the unnormalized monomials, see the module
/// documentation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "StateDoc", into = "StateDoc")]
pub struct PureState {
    terms: BTreeMap<FockBasisState, Complex64>,
}

impl PureState {
    pub fn vacuum() -> Self {
        PureState {
            terms: BTreeMap::from([(FockBasisState::vacuum(), Complex64::new(1.0, 0.0))]),
        }
    }

    /// Sums duplicate monomials and prunes negligible ones. Fails when the
    /// surviving terms carry different photon numbers.
    pub fn from_terms<I>(terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (FockBasisState, Complex64)>,
    {
        let mut acc: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (basis, c) in terms {
            *acc.entry(basis).or_default() += c;
        }
        acc.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        let state = PureState { terms: acc };
        state.check_photon_number()?;
        Ok(state)
    }

    fn check_photon_number(&self) -> Result<(), FockError> {
        let mut numbers = self.terms.keys().map(FockBasisState::photon_count);
        if let Some(first) = numbers.next() {
            if let Some(other) = numbers.find(|&n| n != first) {
                return Err(FockError::MixedPhotonNumber(first, other));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, Complex64)> + '_ {
        self.terms.iter().map(|(b, c)| (b, *c))
    }

    /// Coefficient of the monomial `basis` (zero when absent).
    pub fn coefficient(&self, basis: &FockBasisState) -> Complex64 {
        self.terms.get(basis).copied().unwrap_or_default()
    }

    /// Amplitude on the normalized occupation-number state,
    /// `coefficient · √(Π n!)`.
    pub fn fock_amplitude(&self, basis: &FockBasisState) -> Complex64 {
        self.coefficient(basis) * basis.norm_sqr().sqrt()
    }

    pub fn photon_number(&self) -> Option<u32> {
        self.terms.keys().next().map(FockBasisState::photon_count)
    }

    /// Every mode occupied in at least one term.
    pub fn modes(&self) -> BTreeSet<Mode> {
        self.terms
            .keys()
            .flat_map(|b| b.iter().map(|(m, _)| m))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, (b, c)| acc + c.norm_sqr() * b.norm_sqr())
    }

    pub fn scaled(&self, factor: Complex64) -> PureState {
        PureState {
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.clone(), c * factor))
                .filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD)
                .collect(),
        }
    }

    /// Rescales to unit norm without touching the global phase.
    pub fn normalize(&self) -> Result<PureState, FockError> {
        let norm = self.norm_sqr().sqrt();
        if self.terms.is_empty() || norm < PRUNE_THRESHOLD {
            return Err(FockError::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// `⟨self|other⟩` with bosonic norms.
    pub fn inner_product(&self, other: &PureState) -> Complex64 {
        let (small, large, conj_small) = if self.terms.len() <= other.terms.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .terms
            .iter()
            .filter_map(|(b, cs)| {
                large.terms.get(b).map(|cl| {
                    let weight = b.norm_sqr();
                    if conj_small {
                        cs.conj() * cl * weight
                    } else {
                        cl.conj() * cs * weight
                    }
                })
            })
            .sum()
    }

    pub fn apply_transform(&self, transform: &ModeTransform) -> Result<PureState, FockError> {
        self.apply_transform_with(transform, Limits::default())
    }

    /// Substitutes every creation operator by its image and expands.
    pub fn apply_transform_with(
        &self,
        transform: &ModeTransform,
        limits: Limits,
    ) -> Result<PureState, FockError> {
        if let Some(n) = self.photon_number() {
            if n > limits.max_photons {
                return Err(FockError::TooManyPhotons {
                    photons: n,
                    limit: limits.max_photons,
                });
            }
        }
        let fresh: BTreeSet<Mode> = transform
            .outputs()
            .iter()
            .filter(|m| !transform.acts_on(m))
            .copied()
            .collect();
        if let Some(clash) = self.modes().into_iter().find(|m| fresh.contains(m)) {
            return Err(FockError::ModeConflict(clash));
        }

        let mut out: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
        for (basis, coeff) in &self.terms {
            let mut partial = vec![(FockBasisState::vacuum(), *coeff)];
            for (mode, count) in basis.iter() {
                match transform.image(&mode) {
                    None => {
                        for (b, _) in partial.iter_mut() {
                            for _ in 0..count {
                                b.add_photon(mode);
                            }
                        }
                    }
                    Some(image) => {
                        for _ in 0..count {
                            partial = multiply(&partial, &image);
                        }
                    }
                }
            }
            for (b, c) in partial {
                *out.entry(b).or_default() += c;
            }
        }
        out.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        let state = PureState { terms: out };
        let modes = state.modes().len();
        if modes > limits.max_modes {
            return Err(FockError::TooManyModes {
                modes,
                limit: limits.max_modes,
            });
        }
        Ok(state)
    }

    /// Applies a sequence of transforms in order.
    pub fn propagate<'a, I>(&self, transforms: I) -> Result<PureState, FockError>
    where
        I: IntoIterator<Item = &'a ModeTransform>,
    {
        transforms
            .into_iter()
            .try_fold(self.clone(), |s, t| s.apply_transform(t))
    }

    /// Probability of `pattern` and the renormalized conditional state.
    pub fn postselect(&self, pattern: &DetectionPattern) -> Postselection {
        let kept: BTreeMap<FockBasisState, Complex64> = self
            .terms
            .iter()
            .filter(|(b, _)| pattern.matches(b))
            .map(|(b, c)| (b.clone(), *c))
            .collect();
        let kept = PureState { terms: kept };
        let probability = kept.norm_sqr().clamp(0.0, 1.0);
        let state = if probability > 0.0 {
            kept.normalize().ok()
        } else {
            None
        };
        Postselection { probability, state }
    }

    /// Equality after aligning the global phase on the largest coefficient.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tolerance: f64) -> bool {
        let Some((pivot, c_self)) = self
            .terms
            .iter()
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        else {
            return other.terms.is_empty();
        };
        let c_other = other.coefficient(pivot);
        if c_other.norm() < PRUNE_THRESHOLD {
            return false;
        }
        let phase = c_other / c_other.norm() * (c_self.conj() / c_self.norm());
        let keys: BTreeSet<&FockBasisState> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .all(|b| (self.coefficient(b) * phase - other.coefficient(b)).norm() <= tolerance)
    }
}

fn multiply(
    partial: &[(FockBasisState, Complex64)],
    image: &[(Mode, Complex64)],
) -> Vec<(FockBasisState, Complex64)> {
    let mut next: BTreeMap<FockBasisState, Complex64> = BTreeMap::new();
    for (b, c) in partial {
        for (mode, u) in image {
            *next.entry(b.with_photon(*mode)).or_default() += c * u;
        }
    }
    next.into_iter().collect()
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i) {}", c.re, c.im, b)?;
        }
        Ok(())
    }
}

/// A classical mixture of pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    components: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self, FockError> {
        let sum: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(FockError::InvalidWeights { sum });
        }
        Ok(Ensemble { components })
    }

    pub fn pure(state: PureState) -> Self {
        Ensemble {
            components: vec![(1.0, state)],
        }
    }

    pub fn uniform(states: Vec<PureState>) -> Result<Self, FockError> {
        let w = 1.0 / states.len() as f64;
        Self::new(states.into_iter().map(|s| (w, s)).collect())
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }
}

impl From<PureState> for Ensemble {
    fn from(state: PureState) -> Self {
        Ensemble::pure(state)
    }
}

// JSON layout: {"terms": [{"occupations": [{"mode": ["a", "H", 0], "count": 2}], "amplitude": [re, im]}]}

#[derive(Serialize, Deserialize)]
struct StateDoc {
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    occupations: Vec<OccupationDoc>,
    amplitude: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct OccupationDoc {
    mode: (Port, Polarization, u8),
    count: u32,
}

impl From<PureState> for StateDoc {
    fn from(state: PureState) -> Self {
        StateDoc {
            terms: state
                .terms
                .iter()
                .map(|(b, c)| TermDoc {
                    occupations: b
                        .iter()
                        .map(|(m, n)| OccupationDoc {
                            mode: (m.port, m.polarization, m.bin),
                            count: n,
                        })
                        .collect(),
                    amplitude: [c.re, c.im],
                })
                .collect(),
        }
    }
}

impl TryFrom<StateDoc> for PureState {
    type Error = FockError;

    fn try_from(doc: StateDoc) -> Result<Self, Self::Error> {
        PureState::from_terms(doc.terms.into_iter().map(|t| {
            let basis = FockBasisState::from_occupations(t.occupations.into_iter().map(|o| {
                (Mode::in_bin(o.mode.0, o.mode.1, o.mode.2), o.count)
            }));
            (basis, Complex64::new(t.amplitude[0], t.amplitude[1]))
        }))
    }
}
