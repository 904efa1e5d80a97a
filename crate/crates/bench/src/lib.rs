//! Shared fixtures for the benchmarks.

use ccnode::presets::{NodePulses, SplitterTemplate, TwoNodeSchedule, WindowEnd};
use ccnode::pulse::PulseProtocol;

/// Transit speed that routes the photon with the default node.
pub const ROUTER_NU: f64 = 10.1301;

pub fn router_protocol() -> PulseProtocol {
    SplitterTemplate::default().protocol(ROUTER_NU).expect("router protocol")
}

pub fn flip_protocol() -> PulseProtocol {
    TwoNodeSchedule {
        w: 0.001,
        node1: Some(NodePulses::default()),
        node2: None,
        end: WindowEnd::CavityWidths(2.5),
        ..TwoNodeSchedule::default()
    }
    .protocol()
    .expect("flip protocol")
}
