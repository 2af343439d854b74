//! Test-only oracles that do not go through polynomial expansion.
#![allow(dead_code)]

use biphoton::fock::{FockBasisState, Mode, ModeTransform, Polarization, Port, PureState};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Permanent by summing over all permutations (n ≤ 6 here).
pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut total = Complex64::default();
    permute(&mut idx, 0, &mut |p| {
        total += (0..n).map(|r| m[(r, p[r])]).product::<Complex64>();
    });
    total
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}

fn expand(basis: &FockBasisState) -> Vec<Mode> {
    basis
        .iter()
        .flat_map(|(m, n)| std::iter::repeat(m).take(n as usize))
        .collect()
}

fn factorials(basis: &FockBasisState) -> f64 {
    basis
        .iter()
        .map(|(_, n)| (1..=n).map(f64::from).product::<f64>())
        .product()
}

/// Normalized output amplitude `⟨out|U|state⟩` from permanents of `U`.
///
/// A monomial `c Π a†^n` is `c √(Π n!) |n⟩`, and
/// `⟨m|U|n⟩ = Perm(U[m, n]) / √(Π m! Π n!)`.
pub fn permanent_amplitude(u: &ModeTransform, state: &PureState, out: &FockBasisState) -> Complex64 {
    let col = |m: &Mode| u.inputs().iter().position(|x| x == m);
    let row = |m: &Mode| u.outputs().iter().position(|x| x == m);
    let out_modes = expand(out);
    let mut total = Complex64::default();
    for (basis, c) in state.terms() {
        let in_modes = expand(basis);
        if in_modes.len() != out_modes.len() {
            continue;
        }
        let n = in_modes.len();
        let sub = DMatrix::from_fn(n, n, |r, k| {
            let (o, i) = (out_modes[r], in_modes[k]);
            match (row(&o), col(&i)) {
                (Some(r), Some(k)) => u.matrix()[(r, k)],
                (None, None) if o == i => Complex64::new(1.0, 0.0),
                _ => Complex64::default(),
            }
        });
        total += c * permanent(&sub) / factorials(out).sqrt();
    }
    total
}

/// Fourfold probability by enumerating the 16 detector outcomes
/// (one photon per detector, either temporal bin).
pub fn permanent_fourfold_probability(u: &ModeTransform, state: &PureState) -> f64 {
    let detectors = [
        (Port::C1, Polarization::H),
        (Port::C2, Polarization::V),
        (Port::D1, Polarization::H),
        (Port::D2, Polarization::V),
    ];
    let mut p = 0.0;
    for bins in 0..16u8 {
        let out = FockBasisState::from_modes(
            detectors
                .iter()
                .enumerate()
                .map(|(k, (port, pol))| Mode::in_bin(*port, *pol, (bins >> k) & 1)),
        );
        p += permanent_amplitude(u, state, &out).norm_sqr();
    }
    p
}

/// Ideal PBS as a routing table: H keeps its index, V swaps arms, with a
/// phase `i` on reflection.
pub fn route_ideal_pbs(mode: Mode) -> (Mode, Complex64) {
    let swap = |p: Port| match p {
        Port::A => Port::D,
        Port::B => Port::C,
        other => panic!("no route for {other}"),
    };
    let keep = |p: Port| match p {
        Port::A => Port::C,
        Port::B => Port::D,
        other => panic!("no route for {other}"),
    };
    match mode.polarization {
        Polarization::H => (Mode::in_bin(keep(mode.port), Polarization::H, mode.bin), Complex64::new(1.0, 0.0)),
        Polarization::V => (Mode::in_bin(swap(mode.port), Polarization::V, mode.bin), Complex64::new(0.0, 1.0)),
    }
}

/// 2+2 probability after an ideal PBS by routing every monomial. The PBS is a
/// phased permutation of modes, so distinct monomials never interfere.
pub fn routed_two_by_two_probability(state: &PureState) -> f64 {
    state
        .terms()
        .filter_map(|(basis, c)| {
            let routed: Vec<Mode> = expand(basis).into_iter().map(|m| route_ideal_pbs(m).0).collect();
            let in_c = routed.iter().filter(|m| m.port == Port::C).count();
            let in_d = routed.iter().filter(|m| m.port == Port::D).count();
            (in_c == 2 && in_d == 2).then(|| c.norm_sqr() * basis.norm_sqr())
        })
        .sum()
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-like random unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) }
        } else {
            Complex64::default()
        }
    });
    q * phases
}

pub fn random_modes(k: usize) -> Vec<Mode> {
    let all: Vec<Mode> = [Port::A, Port::B]
        .into_iter()
        .flat_map(|p| {
            Polarization::BOTH
                .into_iter()
                .flat_map(move |pol| (0..2).map(move |b| Mode::in_bin(p, pol, b)))
        })
        .collect();
    all.into_iter().take(k).collect()
}

/// Random normalized state with `photons` photons spread over `modes`.
pub fn random_state(modes: &[Mode], photons: usize, terms: usize, rng: &mut ChaCha8Rng) -> PureState {
    let raw: Vec<(FockBasisState, Complex64)> = (0..terms)
        .map(|_| {
            let basis = FockBasisState::from_modes((0..photons).map(|_| modes[rng.random_range(0..modes.len())]));
            (basis, complex_gaussian(rng))
        })
        .collect();
    PureState::from_terms(raw).unwrap().normalize().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
