//! Time-dependent parameter channels and their sampling into frames.

use crate::error::{Error, Result};
use crate::model::{NodeParams, NodeStatics};
use crate::state::C64;

/// Profiles are exactly zero beyond this many widths from their center.
pub const SUPPORT_SIGMAS: f64 = 8.0;

/// Maps transit speed to coupling width, `σ_g = K / ν`.
pub const DEFAULT_WAIST_CONST: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Gaussian,
    Constant,
}

/// Classical pulse or prescribed coupling envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseProfile {
    pub amplitude: f64,
    /// carrier phase in radians
    pub phase: f64,
    pub center: f64,
    pub width: f64,
    pub shape: Shape,
}

impl PulseProfile {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        Self { amplitude, phase: 0.0, center, width, shape: Shape::Gaussian }
    }

    pub fn constant(amplitude: f64) -> Self {
        Self { amplitude, phase: 0.0, center: 0.0, width: 0.0, shape: Shape::Constant }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(Error::param("amplitude", "must be finite"));
        }
        if self.shape == Shape::Gaussian && !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::param("width", format!("gaussian width must be > 0, got {}", self.width)));
        }
        if self.shape == Shape::Gaussian && !self.center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(())
    }

    /// Real envelope value at `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Constant => self.amplitude,
            Shape::Gaussian => {
                let x = (t - self.center) / self.width;
                if x.abs() > SUPPORT_SIGMAS {
                    0.0
                } else {
                    self.amplitude * (-0.5 * x * x).exp()
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        let e = self.envelope(t);
        if self.phase == 0.0 {
            C64::new(e, 0.0)
        } else {
            C64::from_polar(e, self.phase)
        }
    }

    /// Interval outside which the profile vanishes, `None` for constants.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Constant => None,
            Shape::Gaussian => Some((
                self.center - SUPPORT_SIGMAS * self.width,
                self.center + SUPPORT_SIGMAS * self.width,
            )),
        }
    }
}

/// Cavity coupling seen by an atom crossing the mode waist at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitProfile {
    pub g0: f64,
    /// dimensionless transit speed ν
    pub velocity: f64,
    pub waist_const: f64,
    pub center: f64,
}

impl TransitProfile {
    pub fn new(g0: f64, velocity: f64, center: f64) -> Self {
        Self { g0, velocity, waist_const: DEFAULT_WAIST_CONST, center }
    }

    pub fn width(&self) -> f64 {
        self.waist_const / self.velocity
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.velocity > 0.0 && self.velocity.is_finite()) {
            return Err(Error::param("velocity", format!("must be > 0, got {}", self.velocity)));
        }
        if !(self.waist_const > 0.0 && self.waist_const.is_finite()) {
            return Err(Error::param("waist_const", format!("must be > 0, got {}", self.waist_const)));
        }
        Ok(())
    }

    /// The equivalent gaussian profile with `σ_g = K / ν`.
    pub fn as_pulse(&self) -> PulseProfile {
        PulseProfile::gaussian(self.g0, self.center, self.width())
    }
}

/// Any envelope that can drive a coupling channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Pulse(PulseProfile),
    Transit(TransitProfile),
}

impl Channel {
    pub fn as_pulse(&self) -> PulseProfile {
        match self {
            Channel::Pulse(p) => *p,
            Channel::Transit(t) => t.as_pulse(),
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.as_pulse().eval(t)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Channel::Pulse(p) => p.validate(),
            Channel::Transit(t) => t.validate(),
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.as_pulse().support()
    }
}

impl From<PulseProfile> for Channel {
    fn from(p: PulseProfile) -> Self {
        Channel::Pulse(p)
    }
}

impl From<TransitProfile> for Channel {
    fn from(t: TransitProfile) -> Self {
        Channel::Transit(t)
    }
}

/// Evaluates a single profile at `t`.
pub fn eval_profile(profile: &Channel, t: f64) -> C64 {
    profile.eval(t)
}

/// Channel assignments of one node. Absent channels read as zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeDrive {
    pub omega_l: Option<Channel>,
    pub omega_r: Option<Channel>,
    pub g_l: Option<Channel>,
    pub g_r: Option<Channel>,
    pub statics: NodeStatics,
}

impl NodeDrive {
    pub fn params_at(&self, t: f64) -> NodeParams {
        let read = |c: &Option<Channel>| c.as_ref().map_or(C64::new(0.0, 0.0), |c| c.eval(t));
        NodeParams {
            g_l: read(&self.g_l),
            g_r: read(&self.g_r),
            omega_l: read(&self.omega_l),
            omega_r: read(&self.omega_r),
            statics: self.statics,
        }
    }

    fn channels(&self) -> impl Iterator<Item = &Channel> {
        [&self.omega_l, &self.omega_r, &self.g_l, &self.g_r].into_iter().flatten()
    }

    /// Shifts every gaussian channel center by `dt`.
    pub fn shifted(mut self, dt: f64) -> Self {
        for c in [&mut self.omega_l, &mut self.omega_r, &mut self.g_l, &mut self.g_r].into_iter().flatten() {
            match c {
                Channel::Pulse(p) => p.center += dt,
                Channel::Transit(tr) => tr.center += dt,
            }
        }
        self
    }
}

/// Complete drive schedule for one or two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProtocol {
    nodes: Vec<NodeDrive>,
    fiber: Option<f64>,
    t_start: f64,
    t_end: f64,
    interval: Option<f64>,
}

/// Instantaneous parameters of every node plus the fiber coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterFrame {
    pub time: f64,
    pub nodes: Vec<NodeParams>,
    pub fiber: f64,
}

impl PulseProtocol {
    pub fn single_node(drive: NodeDrive, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![drive], None, t_start, t_end)
    }

    pub fn two_node(node1: NodeDrive, node2: NodeDrive, fiber: f64, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![node1, node2], Some(fiber), t_start, t_end)
    }

    pub fn new(nodes: Vec<NodeDrive>, fiber: Option<f64>, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start < t_end) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::param("t_end", format!("need t_start < t_end, got [{t_start}, {t_end}]")));
        }
        match (nodes.len(), fiber) {
            (1, None) => {}
            (1, Some(_)) => {
                return Err(Error::param("fiber", "single-node protocols have no fiber coupling"))
            }
            (2, Some(w)) if w.is_finite() => {}
            (2, _) => return Err(Error::param("fiber", "two-node protocols need a finite fiber coupling")),
            (n, _) => return Err(Error::param("nodes", format!("expected 1 or 2 nodes, got {n}"))),
        }
        for node in &nodes {
            node.statics.validate()?;
            for c in node.channels() {
                c.validate()?;
            }
        }
        Ok(Self { nodes, fiber, t_start, t_end, interval: None })
    }

    /// Records the spacing between the node-1 and node-2 pulse sets.
    pub fn with_interval(mut self, interval: f64) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn nodes(&self) -> &[NodeDrive] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn fiber(&self) -> Option<f64> {
        self.fiber
    }

    pub fn interval(&self) -> Option<f64> {
        self.interval
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn with_window(mut self, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start < t_end) {
            return Err(Error::param("t_end", format!("need t_start < t_end, got [{t_start}, {t_end}]")));
        }
        self.t_start = t_start;
        self.t_end = t_end;
        Ok(self)
    }

    /// Smallest interval containing the support of every gaussian channel.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.nodes
            .iter()
            .flat_map(|n| n.channels())
            .filter_map(|c| c.support())
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    /// Frame at any `t`, without the window check.
    pub fn frame_at(&self, t: f64) -> ParameterFrame {
        ParameterFrame {
            time: t,
            nodes: self.nodes.iter().map(|n| n.params_at(t)).collect(),
            fiber: self.fiber.unwrap_or(0.0),
        }
    }

    /// First node's parameters at `t`; avoids allocating a frame.
    pub(crate) fn node_params_at(&self, node: usize, t: f64) -> NodeParams {
        self.nodes[node].params_at(t)
    }
}

/// Samples every channel at `t`, which must lie in the protocol window.
pub fn sample_protocol(proto: &PulseProtocol, t: f64) -> Result<ParameterFrame> {
    if !(t >= proto.t_start && t <= proto.t_end) {
        return Err(Error::OutOfRange { t, t_start: proto.t_start, t_end: proto.t_end });
    }
    Ok(proto.frame_at(t))
}

/// Physical transit speed for a dimensionless `ν`, under both readings of
/// the linewidth unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSpeed {
    /// time unit `1/γ` with `γ` the quoted frequency taken as a rate (m/s)
    pub rate: f64,
    /// time unit `1/(2π γ)` (m/s)
    pub angular: f64,
}

/// Converts `ν` to m/s for a mode of amplitude waist `waist` (m).
///
/// The coupling of an atom crossing a mode `exp(-x²/w²)` at speed `v` is a
/// gaussian in time of width `w / (√2 v)`, and `σ_g = K/ν` in units of `1/γ`.
pub fn velocity_to_physical(nu: f64, waist: f64, gamma_ei: f64, waist_const: f64) -> Result<PhysicalSpeed> {
    for (name, v) in [("velocity", nu), ("waist", waist), ("gamma_ei", gamma_ei), ("waist_const", waist_const)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be > 0, got {v}")));
        }
    }
    let sigma_units = waist_const / nu;
    let rate = waist * gamma_ei / (std::f64::consts::SQRT_2 * sigma_units);
    Ok(PhysicalSpeed { rate, angular: rate * std::f64::consts::TAU })
}
