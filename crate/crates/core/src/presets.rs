//! Ready-made protocols: a transiting atom through one node, and sequenced
//! pulse sets on two fiber-coupled nodes.

use crate::error::{Error, Result};
use crate::model::NodeStatics;
use crate::pulse::{NodeDrive, PulseProfile, PulseProtocol, TransitProfile, DEFAULT_WAIST_CONST, SUPPORT_SIGMAS};

/// Single node with gaussian laser pulses and a transit-shaped cavity coupling
/// on both arms. Only the transit speed varies between members of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterTemplate {
    pub g0: f64,
    pub omega_l: f64,
    pub omega_r: f64,
    pub delta: f64,
    /// laser pulse width
    pub sigma_c: f64,
    pub waist_const: f64,
    /// common center of every channel
    pub center: f64,
    /// shift of the transit peak relative to the laser peak
    pub transit_offset: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for SplitterTemplate {
    fn default() -> Self {
        Self {
            g0: 3.0,
            omega_l: 20.0,
            omega_r: 20.0,
            delta: 50.0,
            sigma_c: 20.0,
            waist_const: DEFAULT_WAIST_CONST,
            center: 0.0,
            transit_offset: 0.0,
            kappa: 0.0,
            gamma: 0.0,
        }
    }
}

impl SplitterTemplate {
    pub fn statics(&self) -> NodeStatics {
        NodeStatics::detuned(self.delta).with_losses(self.kappa, self.gamma)
    }

    pub fn drive(&self, nu: f64) -> NodeDrive {
        let laser = |a| Some(PulseProfile::gaussian(a, self.center, self.sigma_c).into());
        let transit = TransitProfile {
            g0: self.g0,
            velocity: nu,
            waist_const: self.waist_const,
            center: self.center + self.transit_offset,
        };
        NodeDrive {
            omega_l: laser(self.omega_l),
            omega_r: laser(self.omega_r),
            g_l: Some(transit.into()),
            g_r: Some(transit.into()),
            statics: self.statics(),
        }
    }

    /// Protocol at speed `nu`, windowed to the support of every channel.
    pub fn protocol(&self, nu: f64) -> Result<PulseProtocol> {
        let drive = self.drive(nu);
        let proto = PulseProtocol::single_node(drive, self.center - 1.0, self.center + 1.0)?;
        let (a, b) = proto.support().ok_or_else(|| Error::param("sigma_c", "protocol has no finite support"))?;
        proto.with_window(a, b)
    }

    /// Protocol at speed `nu` cut to the interval where both lasers exceed `floor`.
    pub fn driven_window(&self, nu: f64, floor: f64) -> Result<PulseProtocol> {
        let weakest = self.omega_l.min(self.omega_r);
        if !(weakest > floor) {
            return Err(Error::param("floor", format!("laser peak {weakest} does not exceed {floor}")));
        }
        let half = self.sigma_c * (2.0 * (weakest / floor).ln()).sqrt();
        PulseProtocol::single_node(self.drive(nu), self.center - half, self.center + half)
    }
}

/// Laser and cavity pulses applied to one node of a two-node protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodePulses {
    pub omega_l: f64,
    pub omega_r: f64,
    /// carrier phase of the `r` laser
    pub omega_r_phase: f64,
    pub sigma_c: f64,
    pub g0: f64,
    pub sigma_g: f64,
    /// `l` laser peak relative to the node's nominal time
    pub omega_l_offset: f64,
    /// `r` laser peak relative to the node's nominal time
    pub omega_r_offset: f64,
    /// cavity coupling peak relative to the node's nominal time
    pub cavity_offset: f64,
}

impl Default for NodePulses {
    fn default() -> Self {
        Self {
            omega_l: 20.0,
            omega_r: 20.0,
            omega_r_phase: 0.0,
            sigma_c: 20.0,
            g0: 3.0,
            sigma_g: 10.0,
            omega_l_offset: 0.0,
            omega_r_offset: 0.0,
            cavity_offset: 0.0,
        }
    }
}

impl NodePulses {
    fn drive(&self, nominal: f64, statics: NodeStatics) -> NodeDrive {
        let cavity = PulseProfile::gaussian(self.g0, nominal + self.cavity_offset, self.sigma_g);
        let omega_r = PulseProfile::gaussian(self.omega_r, nominal + self.omega_r_offset, self.sigma_c);
        NodeDrive {
            omega_l: Some(PulseProfile::gaussian(self.omega_l, nominal + self.omega_l_offset, self.sigma_c).into()),
            omega_r: Some(omega_r.with_phase(self.omega_r_phase).into()),
            g_l: Some(cavity.into()),
            g_r: Some(cavity.into()),
            statics,
        }
    }
}

/// How far the run extends past the last cavity pulse, in cavity widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowEnd {
    /// until every channel has vanished
    FullSupport,
    /// this many widths of the last cavity pulse past its peak
    CavityWidths(f64),
}

/// Node-1 pulse set at `t_c`, node-2 set at `t_c + interval`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoNodeSchedule {
    pub delta: f64,
    pub w: f64,
    pub t_c: f64,
    pub interval: f64,
    pub node1: Option<NodePulses>,
    pub node2: Option<NodePulses>,
    pub end: WindowEnd,
}

impl Default for TwoNodeSchedule {
    fn default() -> Self {
        Self {
            delta: 50.0,
            w: 0.6,
            t_c: 0.0,
            interval: 150.0,
            node1: Some(NodePulses::default()),
            node2: Some(NodePulses::default()),
            end: WindowEnd::FullSupport,
        }
    }
}

impl TwoNodeSchedule {
    pub fn protocol(&self) -> Result<PulseProtocol> {
        let statics = NodeStatics::detuned(self.delta);
        let idle = NodeDrive { statics, ..NodeDrive::default() };
        let n1 = self.node1.map_or(idle, |p| p.drive(self.t_c, statics));
        let n2 = self.node2.map_or(idle, |p| p.drive(self.t_c + self.interval, statics));
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut cavity_end = f64::NEG_INFINITY;
        for (nominal, pulses) in [(self.t_c, self.node1), (self.t_c + self.interval, self.node2)] {
            if let Some(p) = pulses {
                let reach_c = SUPPORT_SIGMAS * p.sigma_c;
                let reach_g = SUPPORT_SIGMAS * p.sigma_g;
                let first_laser = p.omega_l_offset.min(p.omega_r_offset);
                let last_laser = p.omega_l_offset.max(p.omega_r_offset);
                lo = lo.min(nominal + first_laser - reach_c).min(nominal + p.cavity_offset - reach_g);
                hi = hi.max(nominal + last_laser + reach_c).max(nominal + p.cavity_offset + reach_g);
                if let WindowEnd::CavityWidths(k) = self.end {
                    cavity_end = cavity_end.max(nominal + p.cavity_offset + k * p.sigma_g);
                }
            }
        }
        if !lo.is_finite() {
            return Err(Error::param("node1", "a two-node schedule needs at least one pulse set"));
        }
        let t_end = match self.end {
            WindowEnd::FullSupport => hi,
            WindowEnd::CavityWidths(_) => cavity_end,
        };
        Ok(PulseProtocol::two_node(n1, n2, self.w, lo, t_end)?.with_interval(self.interval))
    }
}
