//! Fidelities, velocity sweeps, calibration, decay fits and the stationary
//! atom transfer.

mod calibrate;
mod decay;
mod fidelity;
mod search;
mod stationary;
mod sweep;

pub use calibrate::{calibrate_velocity, calibrate_velocity_near, Calibration, CalibrationTarget};
pub use decay::{extract_decay_rate, DecayFit};
pub use fidelity::{fidelity, fidelity_series};
pub use search::{bounded_search, SearchOptions, SearchResult};
pub use stationary::{stationary_atom_transfer, StationaryRamp, StationaryTransfer};
pub use sweep::{velocity_grid, velocity_sweep, Spacing, SweepRow, SweepTable};
