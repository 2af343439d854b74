//! Few-photon bosonic states over labeled modes.
//!
//! States are stored as polynomials in creation operators acting on the
//! vacuum: a term `c · a_H†² b_V†` is kept with its literal coefficient `c`,
//! and the `n!` factors of the bosonic norm are applied only when norms,
//! inner products or probabilities are evaluated. Written this way the
//! familiar `1/√2` per doubly occupied mode appears verbatim in constructors.
//!
//! Linear optics acts on the creation operators, `a_i† → Σ_j U_ji b_j†`, so
//! propagating a state is plain polynomial substitution and expansion.

mod detect;
mod mode;
mod state;
mod transform;

pub use detect::{DetectionPattern, Detector, Postselection};
pub use mode::{FockBasisState, Mode, Polarization, Port};
pub use state::{Ensemble, PureState};
pub use transform::ModeTransform;

use thiserror::Error;

/// Coefficients with magnitude below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Tolerance of the `‖U†U − I‖_max` check on newly built transforms.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Size limits applied while propagating states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_photons: u32,
    pub max_modes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_photons: 6,
            max_modes: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("state has no amplitude above the prune threshold")]
    ZeroState,
    #[error("transform is not unitary (max deviation {deviation:.3e})")]
    NonUnitaryTransform { deviation: f64 },
    #[error("transform has {inputs} input modes, {outputs} output modes and a {rows}x{cols} matrix")]
    ShapeMismatch {
        inputs: usize,
        outputs: usize,
        rows: usize,
        cols: usize,
    },
    #[error("mode {0} listed twice")]
    DuplicateMode(Mode),
    #[error("terms mix photon numbers {0} and {1}")]
    MixedPhotonNumber(u32, u32),
    #[error("{photons} photons exceed the limit of {limit}")]
    TooManyPhotons { photons: u32, limit: u32 },
    #[error("{modes} occupied modes exceed the limit of {limit}")]
    TooManyModes { modes: usize, limit: usize },
    #[error("output mode {0} is already occupied and is not an input of the transform")]
    ModeConflict(Mode),
    #[error("inconsistent mode universes: {0}")]
    ModeMismatch(String),
    #[error("ensemble weights must be non-negative and sum to 1 (sum = {sum})")]
    InvalidWeights { sum: f64 },
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
