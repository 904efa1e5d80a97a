use crate::dynamics::{photon_in_left, run_single_node, NodeModel};
use crate::error::{Error, Result};
use crate::model::{full_basis, NodeStatics, Sector, FR};
use crate::propagator::{IntegratorOptions, Trajectory};
use crate::pulse::{Channel, NodeDrive, PulseProfile, PulseProtocol, Shape};

/// Atom held at the waist with constant cavity couplings while the two lasers
/// swap: `Ω_r` falls from its peak at the start as `Ω_l` rises to its peak at
/// the end, both gaussian flanks of width `duration / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryRamp {
    pub g: f64,
    pub omega0: f64,
    pub delta: f64,
    pub duration: f64,
    pub t_start: f64,
}

impl Default for StationaryRamp {
    fn default() -> Self {
        Self { g: 3.0, omega0: 20.0, delta: 50.0, duration: 400.0, t_start: 0.0 }
    }
}

impl StationaryRamp {
    pub fn protocol(&self) -> Result<PulseProtocol> {
        if !(self.duration > 0.0) {
            return Err(Error::param("duration", format!("ramp protocol needs duration > 0, got {}", self.duration)));
        }
        let t_end = self.t_start + self.duration;
        let width = self.duration / 3.0;
        let coupling = Some(Channel::from(PulseProfile::constant(self.g)));
        let drive = NodeDrive {
            omega_l: Some(PulseProfile::gaussian(self.omega0, t_end, width).into()),
            omega_r: Some(PulseProfile::gaussian(self.omega0, self.t_start, width).into()),
            g_l: coupling,
            g_r: coupling,
            statics: NodeStatics::detuned(self.delta),
        };
        PulseProtocol::single_node(drive, self.t_start, t_end)
    }

    /// Runs the ramp from `F_l`; a zero duration returns the initial state.
    pub fn run(&self, opts: &IntegratorOptions) -> Result<StationaryTransfer> {
        if self.duration == 0.0 {
            let trajectory = Trajectory::constant(full_basis(Sector::SINGLE), photon_in_left(NodeModel::Full), self.t_start);
            return Ok(StationaryTransfer { trajectory, transfer: 0.0, peak_excited: 0.0 });
        }
        stationary_atom_transfer(&self.protocol()?, opts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryTransfer {
    pub trajectory: Trajectory,
    /// final `F_r` population
    pub transfer: f64,
    pub peak_excited: f64,
}

/// Five-level run from `F_l` under a protocol with constant cavity couplings.
pub fn stationary_atom_transfer(proto: &PulseProtocol, opts: &IntegratorOptions) -> Result<StationaryTransfer> {
    if proto.node_count() != 1 {
        return Err(Error::Precondition("stationary transfer needs a single-node protocol".into()));
    }
    let node = &proto.nodes()[0];
    for (name, ch) in [("g_l", &node.g_l), ("g_r", &node.g_r)] {
        let constant = ch.is_some_and(|c| c.as_pulse().shape == Shape::Constant);
        if !constant {
            return Err(Error::Precondition(format!("{name} must be a constant coupling for a stationary atom")));
        }
    }
    let trajectory = run_single_node(proto, NodeModel::Full, &photon_in_left(NodeModel::Full), opts)?;
    let transfer = trajectory.final_state()[FR].norm_sqr();
    let peak_excited = trajectory.peak_population(&[3, 4]);
    Ok(StationaryTransfer { trajectory, transfer, peak_excited })
}
