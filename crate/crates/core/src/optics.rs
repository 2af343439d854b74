//! Unitary mode transforms for the projection stage and their composition.
//!
//! Every element acts identically on both temporal bins so that delayed
//! photons see the same optics as prompt ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FockError, Mode, ModeTransform, Polarization, Port, PureState};

/// Number of temporal bins carried by every element.
pub const TEMPORAL_BINS: u8 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("reflectivity {0} outside [0, 1]")]
    InvalidReflectivity(f64),
    #[error("temporal overlap {0} outside [0, 1]")]
    InvalidOverlap(f64),
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
}

fn finite(name: &'static str, value: f64) -> Result<f64, OpticsError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OpticsError::NonFinite { name, value })
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Repeats a per-bin block for every temporal bin. `inputs(bin)` and
/// `outputs(bin)` list the modes of one block.
fn per_bin(
    inputs: impl Fn(u8) -> Vec<Mode>,
    outputs: impl Fn(u8) -> Vec<Mode>,
    block: &DMatrix<Complex64>,
) -> Result<ModeTransform, OpticsError> {
    let k = block.nrows();
    let n = k * TEMPORAL_BINS as usize;
    let mut matrix = DMatrix::zeros(n, n);
    let mut ins = Vec::with_capacity(n);
    let mut outs = Vec::with_capacity(n);
    for bin in 0..TEMPORAL_BINS {
        let offset = bin as usize * k;
        matrix.view_mut((offset, offset), (k, k)).copy_from(block);
        ins.extend(inputs(bin));
        outs.extend(outputs(bin));
    }
    Ok(ModeTransform::new(ins, outs, matrix)?)
}

fn hv(port: Port, bin: u8) -> Vec<Mode> {
    vec![
        Mode::in_bin(port, Polarization::H, bin),
        Mode::in_bin(port, Polarization::V, bin),
    ]
}

/// Half-wave plate with its axis at `theta` from the vertical.
///
/// A reflection of the polarization about the plate axis:
/// `H → −cos2θ·H − sin2θ·V`, `V → −sin2θ·H + cos2θ·V`. Rotating the axis by
/// π/2 only flips the overall sign.
pub fn half_wave_plate(theta: f64, port: Port) -> Result<ModeTransform, OpticsError> {
    let theta = finite("theta", theta)?;
    let (s, c) = (2.0 * theta).sin_cos();
    let block = DMatrix::from_row_slice(2, 2, &[re(-c), re(-s), re(-s), re(c)]);
    per_bin(|b| hv(port, b), |b| hv(port, b), &block)
}

/// Polarizing beam splitter between spatial ports.
///
/// For each polarization with reflectivity `r`:
/// `in_a → √(1−r)·out_c + i√r·out_d` and `in_b → √(1−r)·out_d + i√r·out_c`.
/// The ideal splitter transmits H (`r = 0`) and reflects V (`r = 1`).
pub fn polarizing_beam_splitter(
    in_a: Port,
    in_b: Port,
    out_c: Port,
    out_d: Port,
    reflect_h: f64,
    reflect_v: f64,
) -> Result<ModeTransform, OpticsError> {
    for r in [reflect_h, reflect_v] {
        if !(0.0..=1.0).contains(&r) {
            return Err(OpticsError::InvalidReflectivity(r));
        }
    }
    // block order: (a,H) (b,H) (a,V) (b,V) -> (c,H) (d,H) (c,V) (d,V)
    let mut block = DMatrix::zeros(4, 4);
    for (k, r) in [reflect_h, reflect_v].into_iter().enumerate() {
        let t = re((1.0 - r).sqrt());
        let i_r = Complex64::new(0.0, r.sqrt());
        let o = 2 * k;
        block[(o, o)] = t;
        block[(o + 1, o)] = i_r;
        block[(o + 1, o + 1)] = t;
        block[(o, o + 1)] = i_r;
    }
    let pair = |x: Port, y: Port| {
        move |bin: u8| {
            vec![
                Mode::in_bin(x, Polarization::H, bin),
                Mode::in_bin(y, Polarization::H, bin),
                Mode::in_bin(x, Polarization::V, bin),
                Mode::in_bin(y, Polarization::V, bin),
            ]
        }
    };
    per_bin(pair(in_a, in_b), pair(out_c, out_d), &block)
}

/// Ideal PBS: H transmitted, V reflected.
pub fn ideal_pbs(in_a: Port, in_b: Port, out_c: Port, out_d: Port) -> Result<ModeTransform, OpticsError> {
    polarizing_beam_splitter(in_a, in_b, out_c, out_d, 0.0, 1.0)
}

/// Birefringent retarder: `V → e^{iδ}·V`, H untouched.
pub fn birefringent_phase(delta: f64, port: Port) -> Result<ModeTransform, OpticsError> {
    let delta = finite("delta", delta)?;
    let block = DMatrix::from_row_slice(
        2,
        2,
        &[re(1.0), re(0.0), re(0.0), Complex64::from_polar(1.0, delta)],
    );
    per_bin(|b| hv(port, b), |b| hv(port, b), &block)
}

/// Partial temporal labeling of a port: bin 0 → γ·bin0 + √(1−γ²)·bin1,
/// completed to a rotation on the two-bin space.
pub fn temporal_overlap(gamma: f64, port: Port) -> Result<ModeTransform, OpticsError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(OpticsError::InvalidOverlap(gamma));
    }
    let g = re(gamma);
    let l = re((1.0 - gamma * gamma).sqrt());
    let block = DMatrix::from_row_slice(2, 2, &[g, -l, l, g]);
    let mut inputs = Vec::new();
    let mut matrix = DMatrix::zeros(4, 4);
    for (k, pol) in Polarization::BOTH.into_iter().enumerate() {
        inputs.push(Mode::in_bin(port, pol, 0));
        inputs.push(Mode::in_bin(port, pol, 1));
        matrix.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&block);
    }
    Ok(ModeTransform::new(inputs.clone(), inputs, matrix)?)
}

/// One element of a circuit description. Angles are radians in memory and
/// degrees in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    HalfWavePlate {
        port: Port,
        #[serde(rename = "theta_deg", with = "degrees")]
        theta: f64,
    },
    PolarizingBeamSplitter {
        in_a: Port,
        in_b: Port,
        out_c: Port,
        out_d: Port,
        reflect_h: f64,
        reflect_v: f64,
    },
    BirefringentPhase {
        port: Port,
        #[serde(rename = "delta_deg", with = "degrees")]
        delta: f64,
    },
    TemporalOverlap { port: Port, gamma: f64 },
}

impl Element {
    pub fn transform(&self) -> Result<ModeTransform, OpticsError> {
        match *self {
            Element::HalfWavePlate { port, theta } => half_wave_plate(theta, port),
            Element::PolarizingBeamSplitter {
                in_a,
                in_b,
                out_c,
                out_d,
                reflect_h,
                reflect_v,
            } => polarizing_beam_splitter(in_a, in_b, out_c, out_d, reflect_h, reflect_v),
            Element::BirefringentPhase { port, delta } => birefringent_phase(delta, port),
            Element::TemporalOverlap { port, gamma } => temporal_overlap(gamma, port),
        }
    }
}

/// An ordered list of elements.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub label: String,
    pub elements: Vec<Element>,
}

impl Circuit {
    pub fn new(label: impl Into<String>) -> Self {
        Circuit {
            label: label.into(),
            elements: Vec::new(),
        }
    }

    pub fn with(mut self, element: Element) -> Self {
        self.elements.push(element);
        self
    }

    pub fn transforms(&self) -> Result<Vec<ModeTransform>, OpticsError> {
        self.elements.iter().map(Element::transform).collect()
    }

    /// The ordered product of all elements as a single transform.
    pub fn compose(&self) -> Result<ModeTransform, OpticsError> {
        let mut total = ModeTransform::identity(Vec::new())?;
        for t in self.transforms()? {
            total = total.then(&t)?;
        }
        Ok(total)
    }

    /// Propagates `state` element by element.
    pub fn apply(&self, state: &PureState) -> Result<PureState, OpticsError> {
        let transforms = self.transforms()?;
        Ok(state.propagate(&transforms)?)
    }
}

/// JSON angles in degrees; the string `"magic"` reads as atan(√2)/4.
mod degrees {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(radians: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(radians.to_degrees())
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Token(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(deg) => Ok(deg.to_radians()),
            Raw::Token(t) if t == "magic" => Ok(crate::projection::magic_angle()),
            Raw::Token(t) => Err(de::Error::custom(format!("expected degrees or \"magic\", got '{t}'"))),
        }
    }
}
