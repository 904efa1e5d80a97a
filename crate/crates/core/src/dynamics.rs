//! Single-node generators sampled from a pulse protocol.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{
    add_losses, beam_splitter_basis, fill_beam_splitter, fill_full_matrix, fill_three_level, full_basis,
    three_level_basis, DerivedCouplings, Sector,
};
use crate::propagator::{integrate, Generator, IntegratorOptions, Trajectory};
use crate::pulse::PulseProtocol;
use crate::state::{BasisLabel, StateVector, C64};

/// Level of description for one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeModel {
    /// five levels `[f_l, f_r, f_m, e_l, e_r]`
    Full,
    /// excited states eliminated, `[F_m, F_l, F_r]`
    ThreeLevel,
    /// `F_m` also eliminated, `[F_l, F_r]`
    BeamSplitter,
}

impl NodeModel {
    pub fn dim(self) -> usize {
        match self {
            NodeModel::Full => 5,
            NodeModel::ThreeLevel => 3,
            NodeModel::BeamSplitter => 2,
        }
    }

    pub fn basis(self, sector: Sector) -> Vec<BasisLabel> {
        match self {
            NodeModel::Full => full_basis(sector),
            NodeModel::ThreeLevel => three_level_basis(),
            NodeModel::BeamSplitter => beam_splitter_basis(),
        }
    }

    /// Positions of `[F_l, F_r]` in this model's basis.
    pub fn photonic_indices(self) -> [usize; 2] {
        match self {
            NodeModel::Full | NodeModel::BeamSplitter => [0, 1],
            NodeModel::ThreeLevel => [1, 2],
        }
    }
}

/// `M(t)` of the first node of a protocol.
///
/// The full model carries the cavity and excited-state decay rates of the
/// protocol's static parameters; the reduced models carry only the cavity
/// rates on their photonic states.
#[derive(Debug, Clone)]
pub struct SingleNodeGenerator<'a> {
    proto: &'a PulseProtocol,
    model: NodeModel,
    sector: Sector,
}

impl<'a> SingleNodeGenerator<'a> {
    pub fn new(proto: &'a PulseProtocol, model: NodeModel) -> Self {
        Self { proto, model, sector: Sector::SINGLE }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn basis(&self) -> Vec<BasisLabel> {
        self.model.basis(self.sector)
    }
}

impl Generator for SingleNodeGenerator<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) -> Result<()> {
        let p = self.proto.node_params_at(0, t);
        match self.model {
            NodeModel::Full => {
                fill_full_matrix(&p, self.sector, out);
                add_losses(out, &p.statics);
            }
            NodeModel::ThreeLevel => {
                let d = DerivedCouplings::from_params(&p)?;
                fill_three_level(&d, out);
                out[(1, 1)] -= C64::new(0.0, p.statics.kappa_l / 2.0);
                out[(2, 2)] -= C64::new(0.0, p.statics.kappa_r / 2.0);
            }
            NodeModel::BeamSplitter => {
                let d = DerivedCouplings::from_params(&p)?;
                fill_beam_splitter(&d, out)?;
                out[(0, 0)] -= C64::new(0.0, p.statics.kappa_l / 2.0);
                out[(1, 1)] -= C64::new(0.0, p.statics.kappa_r / 2.0);
            }
        }
        Ok(())
    }
}

/// Runs `M(t0 + t1 - s)` negated, which propagates backwards from `t1` to `t0`.
pub struct Reversed<'g, G: ?Sized> {
    inner: &'g G,
    t0: f64,
    t1: f64,
}

impl<'g, G: Generator + ?Sized> Reversed<'g, G> {
    pub fn new(inner: &'g G, t0: f64, t1: f64) -> Self {
        Self { inner, t0, t1 }
    }
}

impl<G: Generator + ?Sized> Generator for Reversed<'_, G> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn fill(&self, s: f64, out: &mut DMatrix<C64>) -> Result<()> {
        self.inner.fill(self.t0 + self.t1 - s, out)?;
        out.neg_mut();
        Ok(())
    }
}

/// Integrates one node over the protocol window.
pub fn run_single_node(
    proto: &PulseProtocol,
    model: NodeModel,
    psi0: &StateVector,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if proto.node_count() != 1 {
        return Err(Error::Precondition(format!(
            "single-node run needs a single-node protocol, got {} nodes",
            proto.node_count()
        )));
    }
    let gen = SingleNodeGenerator::new(proto, model);
    integrate(&gen, &gen.basis(), psi0, proto.t_start(), proto.t_end(), opts)
}

/// Initial state with the photon in cavity `l` (`F_l`) for the given model.
pub fn photon_in_left(model: NodeModel) -> StateVector {
    StateVector::basis(model.dim(), model.photonic_indices()[0])
}

/// Initial state with the photon in cavity `r` (`F_r`) for the given model.
pub fn photon_in_right(model: NodeModel) -> StateVector {
    StateVector::basis(model.dim(), model.photonic_indices()[1])
}
