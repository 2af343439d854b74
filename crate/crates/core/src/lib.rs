//! Exact linear-optics simulation of projecting two polarization-encoded
//! biphoton qutrits onto a maximally entangled two-qutrit state.
//!
//! * [`fock`]: states, mode transforms and post-selection.
//! * [`optics`]: wave plates, polarizing beam splitters, phase plates and
//!   temporal overlap, plus circuit composition.
//! * [`states`]: qutrit, Bell-basis and second-order down-conversion states.
//! * [`projection`]: fourfold detection amplitudes and probabilities.
//! * [`harness`]: parameter scans, Poisson counting and visibility fits.
//! * [`cli`]: the `sim` command-line front end.

pub mod cli;
pub mod fock;
pub mod harness;
pub mod optics;
pub mod projection;
pub mod states;
