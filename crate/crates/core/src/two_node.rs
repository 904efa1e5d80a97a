//! Two nodes joined by a single fiber mode, single-excitation sector.
//!
//! States are numbered 1..=20 in the fixed order of [`TWO_NODE_TABLE`];
//! vector index `i` holds state `i + 1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{DerivedCouplings, NodeParams};
use crate::propagator::{integrate, Generator, IntegratorOptions, Trajectory};
use crate::pulse::{ParameterFrame, PulseProtocol};
use crate::state::{BasisLabel, OneNodeState, StateVector, C64};

pub const TWO_NODE_DIM: usize = 20;

/// `(node 1, node 2, fiber photons)` for states 1..=20.
pub const TWO_NODE_TABLE: [(OneNodeState, OneNodeState, u8); TWO_NODE_DIM] = {
    use OneNodeState::*;
    [
        (Fl, L, 0),
        (Fl, R, 0),
        (Fr, L, 0),
        (Fr, R, 0),
        (Fm, L, 0),
        (Fm, R, 0),
        (L, Fl, 0),
        (R, Fl, 0),
        (L, Fr, 0),
        (R, Fr, 0),
        (L, Fm, 0),
        (R, Fm, 0),
        (L, L, 1),
        (L, R, 1),
        (R, L, 1),
        (R, R, 1),
        (L, V, 0),
        (V, L, 0),
        (R, V, 0),
        (V, R, 0),
    ]
};

/// States coupled only among themselves and never reached from the others.
pub const DECOUPLED_TRIPLE: [usize; 3] = [16, 19, 20];

/// Groups of 1-based states closed under the dynamics.
pub const INVARIANT_GROUPS: [&[usize]; 4] = [
    &[1, 3, 5, 7, 9, 11, 13],
    &[2, 4, 6, 14, 17],
    &[8, 10, 12, 15, 18],
    &[16, 19, 20],
];

/// Ordered labels of the 20 two-node states.
pub fn two_node_basis() -> Vec<BasisLabel> {
    TWO_NODE_TABLE
        .iter()
        .enumerate()
        .map(|(i, &(node1, node2, fiber))| BasisLabel::TwoNode { index: i as u8 + 1, node1, node2, fiber })
        .collect()
}

/// Vector index of the state `|node1, node2>|fiber>`.
pub fn two_node_index(node1: OneNodeState, node2: OneNodeState, fiber: u8) -> Option<usize> {
    TWO_NODE_TABLE.iter().position(|&e| e == (node1, node2, fiber))
}

/// Unit vector on 1-based state `state`.
pub fn two_node_state(state: usize) -> StateVector {
    StateVector::basis(TWO_NODE_DIM, state - 1)
}

/// Normalized superposition of 1-based states with real weights.
pub fn two_node_superposition(terms: &[(usize, f64)]) -> Result<StateVector> {
    let mut amps = [0.0; TWO_NODE_DIM];
    for &(state, w) in terms {
        if !(1..=TWO_NODE_DIM).contains(&state) {
            return Err(Error::param("state", format!("two-node states are 1..=20, got {state}")));
        }
        amps[state - 1] += w;
    }
    StateVector::from_real(&amps).normalized()
}

/// Couplings of one node after eliminating its excited states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeCouplings {
    pub s_l: C64,
    pub s_r: C64,
    /// shift of the states with a photon in cavity `l`
    pub stark_l: f64,
    /// shift of the states with a photon in cavity `r`
    pub stark_r: f64,
    pub delta_m: f64,
}

impl NodeCouplings {
    /// Derived couplings of `p`; a node with no cavity and no laser drive has
    /// all couplings zero even without detunings.
    pub fn from_params(p: &NodeParams) -> Result<Self> {
        let idle = [p.g_l, p.g_r, p.omega_l, p.omega_r].iter().all(|z| z.norm() == 0.0);
        if idle {
            return Ok(Self::default());
        }
        let d = DerivedCouplings::from_params(p)?;
        Ok(Self { s_l: d.s_l, s_r: d.s_r, stark_l: d.stark_l, stark_r: d.stark_r, delta_m: d.delta_m })
    }
}

/// Everything the 20-state matrix depends on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoNodeCouplings {
    pub nodes: [NodeCouplings; 2],
    pub w: f64,
}

impl TwoNodeCouplings {
    pub fn from_frame(frame: &ParameterFrame) -> Result<Self> {
        if frame.nodes.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: frame.nodes.len() });
        }
        Ok(Self {
            nodes: [NodeCouplings::from_params(&frame.nodes[0])?, NodeCouplings::from_params(&frame.nodes[1])?],
            w: frame.fiber,
        })
    }
}

/// 20x20 matrix at one parameter frame.
pub fn build_two_node_matrix(frame: &ParameterFrame) -> Result<DMatrix<C64>> {
    Ok(build_from_couplings(&TwoNodeCouplings::from_frame(frame)?))
}

pub fn build_from_couplings(c: &TwoNodeCouplings) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(TWO_NODE_DIM, TWO_NODE_DIM);
    fill_from_couplings(c, &mut m);
    m
}

fn fill_from_couplings(c: &TwoNodeCouplings, m: &mut DMatrix<C64>) {
    m.fill(C64::new(0.0, 0.0));
    // zero-based positions; each node owns six states starting at `base`
    for (k, base) in [(0usize, 0usize), (1, 6)] {
        let n = &c.nodes[k];
        let (fl_a, fl_b, fr_a, fr_b, fm_a, fm_b) = (base, base + 1, base + 2, base + 3, base + 4, base + 5);
        for i in [fl_a, fl_b] {
            m[(i, i)] = C64::new(n.stark_l, 0.0);
        }
        for i in [fr_a, fr_b] {
            m[(i, i)] = C64::new(n.stark_r, 0.0);
        }
        for i in [fm_a, fm_b] {
            m[(i, i)] = C64::new(n.delta_m, 0.0);
        }
        for (f, fm) in [(fl_a, fm_a), (fl_b, fm_b)] {
            m[(f, fm)] = n.s_l;
            m[(fm, f)] = n.s_l.conj();
        }
        for (f, fm) in [(fr_a, fm_a), (fr_b, fm_b)] {
            m[(f, fm)] = n.s_r;
            m[(fm, f)] = n.s_r.conj();
        }
    }
    let w = C64::new(c.w, 0.0);
    for (a, b) in [(1, 13), (2, 14), (7, 13), (8, 15), (14, 17), (15, 18), (16, 19), (16, 20)] {
        m[(a - 1, b - 1)] = w;
        m[(b - 1, a - 1)] = w;
    }
}

/// Zero-energy eigenstates `[D_3, D_4, D_5]` for unshifted cavity states.
pub fn dark_states_two_node(c: &TwoNodeCouplings) -> Result<[StateVector; 3]> {
    for (k, n) in c.nodes.iter().enumerate() {
        if n.stark_l != 0.0 || n.stark_r != 0.0 {
            return Err(Error::Precondition(format!(
                "dark states need zero cavity Stark shifts, node {} has ({}, {})",
                k + 1,
                n.stark_l,
                n.stark_r
            )));
        }
        if n.s_r.norm() == 0.0 {
            return Err(Error::Precondition(format!("dark states need s_r != 0 on node {}", k + 1)));
        }
        if n.s_l.im != 0.0 || n.s_r.im != 0.0 {
            return Err(Error::Precondition(format!("dark states need real couplings on node {}", k + 1)));
        }
    }
    let r1 = c.nodes[0].s_l.re / c.nodes[0].s_r.re;
    let r2 = c.nodes[1].s_l.re / c.nodes[1].s_r.re;
    let d3 = two_node_superposition(&[(2, 1.0), (4, -r1), (17, -1.0)])?;
    let d4 = two_node_superposition(&[(8, 1.0), (10, -r2), (18, -1.0)])?;
    let d5 = two_node_superposition(&[(1, 1.0), (3, -r1), (7, -1.0), (9, r2)])?;
    Ok([d3, d4, d5])
}

/// `M(t)` of a two-node protocol.
#[derive(Debug, Clone)]
pub struct TwoNodeGenerator<'a> {
    proto: &'a PulseProtocol,
}

impl<'a> TwoNodeGenerator<'a> {
    pub fn new(proto: &'a PulseProtocol) -> Result<Self> {
        if proto.node_count() != 2 {
            return Err(Error::Precondition(format!(
                "two-node run needs a two-node protocol, got {} nodes",
                proto.node_count()
            )));
        }
        Ok(Self { proto })
    }
}

impl Generator for TwoNodeGenerator<'_> {
    fn dim(&self) -> usize {
        TWO_NODE_DIM
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) -> Result<()> {
        let c = TwoNodeCouplings {
            nodes: [
                NodeCouplings::from_params(&self.proto.node_params_at(0, t))?,
                NodeCouplings::from_params(&self.proto.node_params_at(1, t))?,
            ],
            w: self.proto.fiber().unwrap_or(0.0),
        };
        fill_from_couplings(&c, out);
        Ok(())
    }
}

/// Integrates the 20-state system over the protocol window.
pub fn run_protocol_two_node(proto: &PulseProtocol, psi0: &StateVector, opts: &IntegratorOptions) -> Result<Trajectory> {
    let n = psi0.norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::param("initial_state", format!("must be normalized, got norm^2 = {n}")));
    }
    let gen = TwoNodeGenerator::new(proto)?;
    integrate(&gen, &two_node_basis(), psi0, proto.t_start(), proto.t_end(), opts)
}
