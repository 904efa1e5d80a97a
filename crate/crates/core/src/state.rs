//! Basis labels and state vectors shared by every model.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Atomic level of the five-level node atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    Fl,
    Fr,
    Fm,
    El,
    Er,
}

impl AtomLevel {
    pub fn symbol(self) -> &'static str {
        match self {
            AtomLevel::Fl => "f_l",
            AtomLevel::Fr => "f_r",
            AtomLevel::Fm => "f_m",
            AtomLevel::El => "e_l",
            AtomLevel::Er => "e_r",
        }
    }
}

/// One-node product state: atomic level plus photon numbers in cavities l and r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeLevel {
    pub atom: AtomLevel,
    pub n_l: u32,
    pub n_r: u32,
}

impl NodeLevel {
    pub const fn new(atom: AtomLevel, n_l: u32, n_r: u32) -> Self {
        Self { atom, n_l, n_r }
    }
}

/// The short one-node notation used for the single-excitation sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OneNodeState {
    /// f_l, no photons
    L,
    /// f_r, no photons
    R,
    /// f_l, one photon in cavity l
    Fl,
    /// f_r, one photon in cavity r
    Fr,
    /// f_m, no photons
    Fm,
    /// f_l, one photon in cavity r
    U,
    /// f_r, one photon in cavity l
    V,
}

impl OneNodeState {
    pub const ALL: [OneNodeState; 7] = [
        OneNodeState::L,
        OneNodeState::R,
        OneNodeState::Fl,
        OneNodeState::Fr,
        OneNodeState::Fm,
        OneNodeState::U,
        OneNodeState::V,
    ];

    pub fn notation(self) -> &'static str {
        match self {
            OneNodeState::L => "l",
            OneNodeState::R => "r",
            OneNodeState::Fl => "F_l",
            OneNodeState::Fr => "F_r",
            OneNodeState::Fm => "F_m",
            OneNodeState::U => "u",
            OneNodeState::V => "v",
        }
    }

    pub fn level(self) -> NodeLevel {
        use AtomLevel::*;
        match self {
            OneNodeState::L => NodeLevel::new(Fl, 0, 0),
            OneNodeState::R => NodeLevel::new(Fr, 0, 0),
            OneNodeState::Fl => NodeLevel::new(Fl, 1, 0),
            OneNodeState::Fr => NodeLevel::new(Fr, 0, 1),
            OneNodeState::Fm => NodeLevel::new(Fm, 0, 0),
            OneNodeState::U => NodeLevel::new(Fl, 0, 1),
            OneNodeState::V => NodeLevel::new(Fr, 1, 0),
        }
    }

    pub fn from_level(level: NodeLevel) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.level() == level)
    }

    /// Total excitation carried by the node (photons plus f_m).
    pub fn excitation(self) -> u32 {
        match self {
            OneNodeState::L | OneNodeState::R => 0,
            _ => 1,
        }
    }
}

/// Symbolic label of one basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Node(NodeLevel),
    TwoNode {
        /// 1-based position in the two-node table
        index: u8,
        node1: OneNodeState,
        node2: OneNodeState,
        fiber: u8,
    },
    /// Anonymous position, for generators without a physical basis.
    Index(u16),
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisLabel::Node(level) => match level.atom {
                AtomLevel::El | AtomLevel::Er if level.n_l == 0 && level.n_r == 0 => {
                    f.write_str(level.atom.symbol())
                }
                _ => match OneNodeState::from_level(level) {
                    Some(s) => f.write_str(s.notation()),
                    None => write!(f, "{}({};{})", level.atom.symbol(), level.n_l, level.n_r),
                },
            },
            BasisLabel::TwoNode { node1, node2, fiber, .. } => {
                write!(f, "{}/{}/f{}", node1.notation(), node2.notation(), fiber)
            }
            BasisLabel::Index(i) => write!(f, "s{i}"),
        }
    }
}

/// Ordered complex amplitudes over a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Self {
        Self(amplitudes)
    }

    pub fn from_slice(amplitudes: &[C64]) -> Self {
        Self(DVector::from_column_slice(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self(DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&a| C64::new(a, 0.0)),
        ))
    }

    /// Unit vector on basis index `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self(self.0.unscale(n)))
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.0.dotc(&other.0))
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_notation_round_trips() {
        for s in OneNodeState::ALL {
            assert_eq!(OneNodeState::from_level(s.level()), Some(s));
        }
    }

    #[test]
    fn display_uses_short_notation() {
        let fl = BasisLabel::Node(NodeLevel::new(AtomLevel::Fl, 1, 0));
        assert_eq!(fl.to_string(), "F_l");
        let el = BasisLabel::Node(NodeLevel::new(AtomLevel::El, 0, 0));
        assert_eq!(el.to_string(), "e_l");
        let high = BasisLabel::Node(NodeLevel::new(AtomLevel::Fl, 4, 0));
        assert_eq!(high.to_string(), "f_l(4;0)");
    }

    #[test]
    fn zero_vector_cannot_be_normalized() {
        let z = StateVector::from_real(&[0.0, 0.0]);
        assert_eq!(z.normalized(), Err(Error::ZeroNorm));
    }
}
