//! Run configuration file format.

use std::collections::BTreeMap;
use std::path::Path;

use ccnode::analysis::{CalibrationTarget, Spacing, StationaryRamp};
use ccnode::dynamics::NodeModel;
use ccnode::model::NodeStatics;
use ccnode::presets::{NodePulses, SplitterTemplate, TwoNodeSchedule, WindowEnd};
use ccnode::propagator::IntegratorOptions;
use ccnode::pulse::{Channel, NodeDrive, PulseProfile, PulseProtocol, TransitProfile, DEFAULT_WAIST_CONST};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA: &str = "ccnode/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SingleRun,
    Unitary,
    Sweep,
    Calibrate,
    TwoNode,
    Linewidth,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    #[default]
    Full,
    ThreeLevel,
    BeamSplitter,
}

impl From<ModelChoice> for NodeModel {
    fn from(m: ModelChoice) -> Self {
        match m {
            ModelChoice::Full => NodeModel::Full,
            ModelChoice::ThreeLevel => NodeModel::ThreeLevel,
            ModelChoice::BeamSplitter => NodeModel::BeamSplitter,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    pub mode: Mode,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub model: ModelChoice,
    /// transit-driven node; the speed is `nu`
    #[serde(default)]
    pub splitter: Option<SplitterSpec>,
    #[serde(default)]
    pub nu: Option<f64>,
    /// node with explicitly listed channels
    #[serde(default)]
    pub node: Option<NodeSpec>,
    #[serde(default)]
    pub network: Option<NetworkSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub calibrate: Option<CalibrateSpec>,
    #[serde(default)]
    pub stationary: Option<StationarySpec>,
    #[serde(default)]
    pub linewidth: Option<LinewidthSpec>,
    #[serde(default)]
    pub initial_state: Option<StateSpec>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub units: Option<UnitsSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitterSpec {
    pub g0: f64,
    pub omega_l: f64,
    pub omega_r: f64,
    pub delta: f64,
    pub sigma_c: f64,
    pub waist_const: f64,
    pub center: f64,
    pub transit_offset: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for SplitterSpec {
    fn default() -> Self {
        let t = SplitterTemplate::default();
        Self {
            g0: t.g0,
            omega_l: t.omega_l,
            omega_r: t.omega_r,
            delta: t.delta,
            sigma_c: t.sigma_c,
            waist_const: t.waist_const,
            center: t.center,
            transit_offset: t.transit_offset,
            kappa: t.kappa,
            gamma: t.gamma,
        }
    }
}

impl From<SplitterSpec> for SplitterTemplate {
    fn from(s: SplitterSpec) -> Self {
        SplitterTemplate {
            g0: s.g0,
            omega_l: s.omega_l,
            omega_r: s.omega_r,
            delta: s.delta,
            sigma_c: s.sigma_c,
            waist_const: s.waist_const,
            center: s.center,
            transit_offset: s.transit_offset,
            kappa: s.kappa,
            gamma: s.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticsSpec {
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta_l: Option<f64>,
    #[serde(default)]
    pub delta_r: Option<f64>,
    #[serde(default)]
    pub raman_l: f64,
    #[serde(default)]
    pub raman_r: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub kappa_l: Option<f64>,
    #[serde(default)]
    pub kappa_r: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_l: Option<f64>,
    #[serde(default)]
    pub gamma_r: Option<f64>,
}

impl StaticsSpec {
    fn resolve(&self) -> NodeStatics {
        let pick = |arm: Option<f64>, both: Option<f64>| arm.or(both).unwrap_or(0.0);
        NodeStatics {
            delta_l: pick(self.delta_l, self.delta),
            delta_r: pick(self.delta_r, self.delta),
            raman_l: self.raman_l,
            raman_r: self.raman_r,
            kappa_l: pick(self.kappa_l, self.kappa),
            kappa_r: pick(self.kappa_r, self.kappa),
            gamma_l: pick(self.gamma_l, self.gamma),
            gamma_r: pick(self.gamma_r, self.gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeSpec {
    #[default]
    Gaussian,
    Constant,
    Transit,
}

/// One coupling channel. Gaussian pulses need `width`, transits need `velocity`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub shape: ShapeSpec,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub velocity: Option<f64>,
    #[serde(default)]
    pub waist_const: Option<f64>,
}

impl ChannelSpec {
    fn resolve(&self, key: &str) -> Result<Channel, CliError> {
        let unused = |field: &str, present: bool| {
            if present {
                Err(CliError::config(format!("{key}.{field}"), format!("not used by a {:?} channel", self.shape)))
            } else {
                Ok(())
            }
        };
        match self.shape {
            ShapeSpec::Gaussian => {
                unused("velocity", self.velocity.is_some())?;
                unused("waist_const", self.waist_const.is_some())?;
                let width = self.width.ok_or_else(|| CliError::config(format!("{key}.width"), "required for a gaussian channel"))?;
                Ok(PulseProfile::gaussian(self.amplitude, self.center, width).with_phase(self.phase).into())
            }
            ShapeSpec::Constant => {
                unused("width", self.width.is_some())?;
                unused("velocity", self.velocity.is_some())?;
                unused("waist_const", self.waist_const.is_some())?;
                Ok(PulseProfile::constant(self.amplitude).with_phase(self.phase).into())
            }
            ShapeSpec::Transit => {
                unused("width", self.width.is_some())?;
                if self.phase != 0.0 {
                    return Err(CliError::config(format!("{key}.phase"), "a transit channel is real"));
                }
                let velocity =
                    self.velocity.ok_or_else(|| CliError::config(format!("{key}.velocity"), "required for a transit channel"))?;
                Ok(TransitProfile {
                    g0: self.amplitude,
                    velocity,
                    waist_const: self.waist_const.unwrap_or(DEFAULT_WAIST_CONST),
                    center: self.center,
                }
                .into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default)]
    pub statics: StaticsSpec,
    #[serde(default)]
    pub omega_l: Option<ChannelSpec>,
    #[serde(default)]
    pub omega_r: Option<ChannelSpec>,
    #[serde(default)]
    pub g_l: Option<ChannelSpec>,
    #[serde(default)]
    pub g_r: Option<ChannelSpec>,
    /// run interval; defaults to the support of the channels
    #[serde(default)]
    pub window: Option<[f64; 2]>,
}

impl NodeSpec {
    pub fn drive(&self) -> Result<NodeDrive, CliError> {
        let ch = |c: &Option<ChannelSpec>, key: &str| c.as_ref().map(|c| c.resolve(&format!("node.{key}"))).transpose();
        Ok(NodeDrive {
            omega_l: ch(&self.omega_l, "omega_l")?,
            omega_r: ch(&self.omega_r, "omega_r")?,
            g_l: ch(&self.g_l, "g_l")?,
            g_r: ch(&self.g_r, "g_r")?,
            statics: self.statics.resolve(),
        })
    }

    pub fn protocol(&self) -> Result<PulseProtocol, CliError> {
        let drive = self.drive()?;
        let (t0, t1) = match self.window {
            Some([a, b]) => (a, b),
            None => {
                let probe = PulseProtocol::single_node(drive, 0.0, 1.0).map_err(|e| CliError::config("node", e.to_string()))?;
                probe.support().ok_or_else(|| {
                    CliError::config("node.window", "required when no channel has finite support")
                })?
            }
        };
        PulseProtocol::single_node(drive, t0, t1).map_err(|e| CliError::config("node", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodePulsesSpec {
    pub omega_l: f64,
    pub omega_r: f64,
    pub omega_r_phase: f64,
    pub sigma_c: f64,
    pub g0: f64,
    pub sigma_g: f64,
    pub omega_l_offset: f64,
    pub omega_r_offset: f64,
    pub cavity_offset: f64,
}

impl Default for NodePulsesSpec {
    fn default() -> Self {
        let p = NodePulses::default();
        Self {
            omega_l: p.omega_l,
            omega_r: p.omega_r,
            omega_r_phase: p.omega_r_phase,
            sigma_c: p.sigma_c,
            g0: p.g0,
            sigma_g: p.sigma_g,
            omega_l_offset: p.omega_l_offset,
            omega_r_offset: p.omega_r_offset,
            cavity_offset: p.cavity_offset,
        }
    }
}

impl From<NodePulsesSpec> for NodePulses {
    fn from(s: NodePulsesSpec) -> Self {
        NodePulses {
            omega_l: s.omega_l,
            omega_r: s.omega_r,
            omega_r_phase: s.omega_r_phase,
            sigma_c: s.sigma_c,
            g0: s.g0,
            sigma_g: s.sigma_g,
            omega_l_offset: s.omega_l_offset,
            omega_r_offset: s.omega_r_offset,
            cavity_offset: s.cavity_offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowEndSpec {
    FullSupport,
    CavityWidths(f64),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_fiber")]
    pub w: f64,
    #[serde(default)]
    pub t_c: f64,
    #[serde(default = "default_interval")]
    pub interval: f64,
    pub node1: Option<NodePulsesSpec>,
    pub node2: Option<NodePulsesSpec>,
    #[serde(default)]
    pub end: Option<WindowEndSpec>,
}

fn default_delta() -> f64 {
    TwoNodeSchedule::default().delta
}

fn default_fiber() -> f64 {
    TwoNodeSchedule::default().w
}

fn default_interval() -> f64 {
    TwoNodeSchedule::default().interval
}

impl NetworkSpec {
    pub fn schedule(&self) -> TwoNodeSchedule {
        TwoNodeSchedule {
            delta: self.delta,
            w: self.w,
            t_c: self.t_c,
            interval: self.interval,
            node1: self.node1.map(Into::into),
            node2: self.node2.map(Into::into),
            end: match self.end {
                None | Some(WindowEndSpec::FullSupport) => WindowEnd::FullSupport,
                Some(WindowEndSpec::CavityWidths(k)) => WindowEnd::CavityWidths(k),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingSpec {
    #[default]
    Linear,
    Log,
}

impl From<SpacingSpec> for Spacing {
    fn from(s: SpacingSpec) -> Self {
        match s {
            SpacingSpec::Linear => Spacing::Linear,
            SpacingSpec::Log => Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub range: [f64; 2],
    pub points: usize,
    #[serde(default)]
    pub spacing: SpacingSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum TargetValue {
    Named(NamedTarget),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedTarget {
    Router,
    Balanced,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSpec {
    pub target: TargetValue,
    pub range: [f64; 2],
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-3
}

impl CalibrateSpec {
    pub fn target(&self) -> CalibrationTarget {
        match self.target {
            TargetValue::Named(NamedTarget::Router) => CalibrationTarget::Router,
            TargetValue::Named(NamedTarget::Balanced) => CalibrationTarget::Balanced,
            TargetValue::Value(v) => CalibrationTarget::Custom(v),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySpec {
    pub g: f64,
    pub omega0: f64,
    pub delta: f64,
    pub duration: f64,
    pub t_start: f64,
}

impl Default for StationarySpec {
    fn default() -> Self {
        let r = StationaryRamp::default();
        Self { g: r.g, omega0: r.omega0, delta: r.delta, duration: r.duration, t_start: r.t_start }
    }
}

impl From<StationarySpec> for StationaryRamp {
    fn from(s: StationarySpec) -> Self {
        StationaryRamp { g: s.g, omega0: s.omega0, delta: s.delta, duration: s.duration, t_start: s.t_start }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinewidthSpec {
    /// fit interval; defaults to the middle 60% of the run
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    /// time at which the effective linewidths are evaluated; defaults to mid-run
    #[serde(default)]
    pub at: Option<f64>,
}

/// Amplitude given as a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeSpec {
    Real(f64),
    Complex([f64; 2]),
}

/// A basis label, a 1-based two-node state number, or a map of either to amplitudes.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Label(String),
    Index(usize),
    Amplitudes(BTreeMap<String, AmplitudeSpec>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub label: String,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    #[serde(default)]
    pub fixed_dt: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

impl IntegratorSpec {
    pub fn options(&self) -> Result<IntegratorOptions, CliError> {
        let mut o = IntegratorOptions::default();
        if let Some(dt) = self.fixed_dt {
            if self.rtol.is_some() || self.atol.is_some() {
                return Err(CliError::config("integrator.fixed_dt", "cannot be combined with rtol/atol"));
            }
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::config("integrator.fixed_dt", format!("must be > 0, got {dt}")));
            }
            o = IntegratorOptions::fixed(dt);
        } else if self.rtol.is_some() || self.atol.is_some() {
            let ccnode::propagator::StepControl::Adaptive { rtol, atol } = o.control else { unreachable!() };
            o = o.with_tolerances(self.rtol.unwrap_or(rtol), self.atol.unwrap_or(atol));
        }
        if let Some(n) = self.samples {
            if n < 2 {
                return Err(CliError::config("integrator.samples", format!("must be >= 2, got {n}")));
            }
            o = o.with_samples(n);
        }
        Ok(o)
    }
}

/// Physical scales used only to report speeds in m/s.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSpec {
    /// cavity mode waist in metres
    pub waist_m: f64,
    /// excited-state linewidth in 1/s
    pub linewidth_per_s: f64,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::config("schema", format!("expected \"{SCHEMA}\", got \"{}\"", cfg.schema)));
        }
        cfg.check_sections()?;
        Ok(cfg)
    }

    fn check_sections(&self) -> Result<(), CliError> {
        let present: [(&str, bool); 7] = [
            ("splitter", self.splitter.is_some()),
            ("node", self.node.is_some()),
            ("network", self.network.is_some()),
            ("sweep", self.sweep.is_some()),
            ("calibrate", self.calibrate.is_some()),
            ("stationary", self.stationary.is_some()),
            ("linewidth", self.linewidth.is_some()),
        ];
        let allowed: &[&str] = match self.mode {
            Mode::SingleRun | Mode::Unitary => &["splitter", "node"],
            Mode::Sweep => &["splitter", "sweep"],
            Mode::Calibrate => &["splitter", "calibrate"],
            Mode::TwoNode => &["network"],
            Mode::Linewidth => &["splitter", "node", "linewidth"],
            Mode::Stationary => &["stationary"],
        };
        for (key, is_set) in present {
            if is_set && !allowed.contains(&key) {
                return Err(CliError::config(key, format!("not used in mode {:?}", self.mode)));
            }
        }
        let single = matches!(self.mode, Mode::SingleRun | Mode::Unitary | Mode::Linewidth);
        if single && self.splitter.is_some() == self.node.is_some() {
            return Err(CliError::config("splitter", "give exactly one of `splitter` (with `nu`) or `node`"));
        }
        let needs_nu = self.splitter.is_some() && single;
        if needs_nu && self.nu.is_none() {
            return Err(CliError::config("nu", "required with `splitter` in this mode"));
        }
        if !needs_nu && self.nu.is_some() {
            return Err(CliError::config("nu", format!("not used in mode {:?} without `splitter`", self.mode)));
        }
        let required = |key: &str, ok: bool| if ok { Ok(()) } else { Err(CliError::config(key, format!("required in mode {:?}", self.mode))) };
        match self.mode {
            Mode::Sweep => {
                required("splitter", self.splitter.is_some())?;
                required("sweep", self.sweep.is_some())?;
            }
            Mode::Calibrate => {
                required("splitter", self.splitter.is_some())?;
                required("calibrate", self.calibrate.is_some())?;
            }
            Mode::TwoNode => required("network", self.network.is_some())?,
            _ => {}
        }
        if self.model != ModelChoice::Full && !matches!(self.mode, Mode::SingleRun) {
            return Err(CliError::config("model", "reduced models are only available in single-run mode"));
        }
        if matches!(self.mode, Mode::Unitary | Mode::Sweep | Mode::Calibrate | Mode::Stationary) && self.initial_state.is_some()
        {
            return Err(CliError::config("initial_state", format!("not used in mode {:?}", self.mode)));
        }
        Ok(())
    }

    pub fn splitter_protocol(&self) -> Result<Option<PulseProtocol>, CliError> {
        match (self.splitter, self.nu) {
            (Some(s), Some(nu)) => {
                SplitterTemplate::from(s).protocol(nu).map(Some).map_err(|e| CliError::config("splitter", e.to_string()))
            }
            _ => Ok(None),
        }
    }
}
