use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::factorial;

/// Spatial port labels.
///
/// `A`/`B` are the two source arms, `C`/`D` the outputs of the overlapping
/// PBS, `AuxC`/`AuxD` the unused (vacuum) inputs of the two analysis PBSs and
/// `C1`, `C2`, `D1`, `D2` the ports leading to detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    A,
    B,
    C,
    D,
    AuxC,
    AuxD,
    C1,
    C2,
    D1,
    D2,
}

impl Port {
    pub const ALL: [Port; 10] = [
        Port::A,
        Port::B,
        Port::C,
        Port::D,
        Port::AuxC,
        Port::AuxD,
        Port::C1,
        Port::C2,
        Port::D1,
        Port::D2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Port::A => "a",
            Port::B => "b",
            Port::C => "c",
            Port::D => "d",
            Port::AuxC => "aux_c",
            Port::AuxD => "aux_d",
            Port::C1 => "c1",
            Port::C2 => "c2",
            Port::D1 => "d1",
            Port::D2 => "d2",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Port::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown port '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// A bosonic mode: spatial port, polarization and temporal bin.
///
/// The derived ordering is lexicographic in (port, polarization, bin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub port: Port,
    pub polarization: Polarization,
    pub bin: u8,
}

impl Mode {
    pub const fn new(port: Port, polarization: Polarization) -> Self {
        Mode {
            port,
            polarization,
            bin: 0,
        }
    }

    pub const fn in_bin(port: Port, polarization: Polarization, bin: u8) -> Self {
        Mode {
            port,
            polarization,
            bin,
        }
    }

    pub const fn h(port: Port) -> Self {
        Mode::new(port, Polarization::H)
    }

    pub const fn v(port: Port) -> Self {
        Mode::new(port, Polarization::V)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.port, self.polarization)?;
        if self.bin != 0 {
            write!(f, "[t{}]", self.bin)?;
        }
        Ok(())
    }
}

/// An occupation-number basis element, i.e. the monomial `Π a_m†^{n_m}`
/// applied to the vacuum. Zero occupations are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState {
    occupations: BTreeMap<Mode, u32>,
}

impl FockBasisState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// One photon per listed mode; repeated modes stack.
    pub fn from_modes<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        let mut basis = Self::default();
        for mode in modes {
            basis.add_photon(mode);
        }
        basis
    }

    pub fn from_occupations<I: IntoIterator<Item = (Mode, u32)>>(occupations: I) -> Self {
        let mut basis = Self::default();
        for (mode, count) in occupations {
            if count > 0 {
                *basis.occupations.entry(mode).or_insert(0) += count;
            }
        }
        basis
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn occupation(&self, mode: &Mode) -> u32 {
        self.occupations.get(mode).copied().unwrap_or(0)
    }

    pub fn photon_count(&self) -> u32 {
        self.occupations.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, u32)> + '_ {
        self.occupations.iter().map(|(m, n)| (*m, *n))
    }

    /// `⟨vac| Π a^n Π a†^n |vac⟩ = Π n!`
    pub fn norm_sqr(&self) -> f64 {
        self.occupations.values().map(|&n| factorial(n)).product()
    }

    pub(crate) fn add_photon(&mut self, mode: Mode) {
        *self.occupations.entry(mode).or_insert(0) += 1;
    }

    pub(crate) fn with_photon(&self, mode: Mode) -> Self {
        let mut next = self.clone();
        next.add_photon(mode);
        next
    }
}

impl fmt::Display for FockBasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return f.write_str("|vac>");
        }
        for (i, (mode, n)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{mode}")?;
            if n > 1 {
                write!(f, "^{n}")?;
            }
        }
        Ok(())
    }
}
