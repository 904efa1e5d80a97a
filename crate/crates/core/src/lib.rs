//! Crossed-cavity single-photon beam-splitter node and two-node fiber network.
//!
//! Units: rates and couplings in units of the excited-state linewidth, times
//! in its inverse.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod propagator;
pub mod presets;
pub mod pulse;
pub mod state;
pub mod two_node;

pub use error::{Error, Result};
pub use state::{AtomLevel, BasisLabel, NodeLevel, OneNodeState, StateVector, C64};
