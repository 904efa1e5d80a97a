//! Mode dispatch.

use ccnode::analysis::{
    calibrate_velocity, extract_decay_rate, fidelity, velocity_sweep, Calibration, StationaryRamp, SweepRow, SweepTable,
};
use ccnode::dynamics::{photon_in_left, run_single_node, NodeModel};
use ccnode::model::{effective_linewidths, LinewidthVariant};
use ccnode::presets::SplitterTemplate;
use ccnode::propagator::{effective_unitary, EffectiveUnitary, IntegratorOptions, Trajectory};
use ccnode::pulse::{velocity_to_physical, PulseProtocol};
use ccnode::two_node::{run_protocol_two_node, DECOUPLED_TRIPLE};
use ccnode::{BasisLabel, StateVector, C64};
use serde_json::{json, Map, Value};

use crate::config::{AmplitudeSpec, Config, Mode, StateSpec};
use crate::error::CliError;

/// Everything a run produces.
pub struct Outcome {
    pub trajectory: Option<Trajectory>,
    pub sweep: Option<SweepTable>,
    pub summary: Value,
}

pub fn execute(cfg: &Config, opts: &IntegratorOptions) -> Result<Outcome, CliError> {
    let mut summary = Map::new();
    summary.insert("schema".into(), json!(crate::config::SCHEMA));
    summary.insert("mode".into(), serde_json::to_value(mode_name(cfg.mode)).expect("string"));
    if let Some(d) = &cfg.description {
        summary.insert("description".into(), json!(d));
    }
    let (trajectory, sweep) = match cfg.mode {
        Mode::SingleRun => (Some(single_run(cfg, opts, &mut summary)?), None),
        Mode::Unitary => (Some(unitary(cfg, opts, &mut summary)?), None),
        Mode::Sweep => (None, Some(sweep(cfg, opts, &mut summary)?)),
        Mode::Calibrate => (Some(calibrate(cfg, opts, &mut summary)?), None),
        Mode::TwoNode => (Some(two_node(cfg, opts, &mut summary)?), None),
        Mode::Linewidth => (Some(linewidth(cfg, opts, &mut summary)?), None),
        Mode::Stationary => (Some(stationary(cfg, opts, &mut summary)?), None),
    };
    if let Some(tr) = &trajectory {
        describe_trajectory(cfg, tr, &mut summary)?;
    }
    Ok(Outcome { trajectory, sweep, summary: Value::Object(summary) })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::SingleRun => "single-run",
        Mode::Unitary => "unitary",
        Mode::Sweep => "sweep",
        Mode::Calibrate => "calibrate",
        Mode::TwoNode => "two-node",
        Mode::Linewidth => "linewidth",
        Mode::Stationary => "stationary",
    }
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn single_protocol(cfg: &Config) -> Result<PulseProtocol, CliError> {
    match (cfg.splitter_protocol()?, &cfg.node) {
        (Some(p), _) => Ok(p),
        (None, Some(node)) => node.protocol(),
        (None, None) => Err(CliError::config("node", format!("required in mode {}", mode_name(cfg.mode)))),
    }
}

/// Resolves a state against `basis`; numbers are 1-based positions.
pub fn resolve_state(spec: &StateSpec, basis: &[BasisLabel], key: &str) -> Result<StateVector, CliError> {
    let labels: Vec<String> = basis.iter().map(ToString::to_string).collect();
    let index = |n: usize| -> Result<usize, CliError> {
        if (1..=basis.len()).contains(&n) {
            Ok(n - 1)
        } else {
            Err(CliError::config(key, format!("state number {n} outside 1..={}", basis.len())))
        }
    };
    let position = |name: &str| -> Result<usize, CliError> {
        if let Some(i) = labels.iter().position(|l| l == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(n) => index(n),
            Err(_) => Err(CliError::config(key, format!("unknown basis label \"{name}\"; expected one of {}", labels.join(", ")))),
        }
    };
    let raw = match spec {
        StateSpec::Label(name) => StateVector::basis(basis.len(), position(name)?),
        StateSpec::Index(n) => StateVector::basis(basis.len(), index(*n)?),
        StateSpec::Amplitudes(map) => {
            let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
            for (name, a) in map {
                let z = match *a {
                    AmplitudeSpec::Real(re) => C64::new(re, 0.0),
                    AmplitudeSpec::Complex([re, im]) => C64::new(re, im),
                };
                amps[position(name)?] += z;
            }
            StateVector::from_slice(&amps)
        }
    };
    raw.normalized().map_err(|_| CliError::config(key, "state has zero norm"))
}

fn initial_state(cfg: &Config, basis: &[BasisLabel], default: Option<StateVector>) -> Result<StateVector, CliError> {
    match (&cfg.initial_state, default) {
        (Some(spec), _) => resolve_state(spec, basis, "initial_state"),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::config("initial_state", format!("required in mode {}", mode_name(cfg.mode)))),
    }
}

fn describe_trajectory(cfg: &Config, tr: &Trajectory, summary: &mut Map<String, Value>) -> Result<(), CliError> {
    let last = tr.final_state();
    let populations: Map<String, Value> =
        tr.basis.iter().zip(last.populations()).map(|(l, p)| (l.to_string(), json!(p))).collect();
    summary.insert("final_time".into(), json!(tr.final_time()));
    summary.insert("final_populations".into(), Value::Object(populations));
    summary.insert("final_norm".into(), json!(last.norm_sqr()));
    let drift = tr.norms.iter().map(|n| (n - tr.norms[0]).abs()).fold(0.0, f64::max);
    summary.insert("max_norm_change".into(), json!(drift));
    let mut fidelities = Map::new();
    for (i, t) in cfg.targets.iter().enumerate() {
        let target = resolve_state(&t.state, &tr.basis, &format!("targets[{i}].state"))?;
        fidelities.insert(t.label.clone(), json!(fidelity(last, &target)?));
    }
    if !fidelities.is_empty() {
        summary.insert("fidelities".into(), Value::Object(fidelities));
    }
    Ok(())
}

fn physical_speed(cfg: &Config, nu: f64, waist_const: f64, summary: &mut Map<String, Value>) -> Result<(), CliError> {
    if let Some(u) = cfg.units {
        let s = velocity_to_physical(nu, u.waist_m, u.linewidth_per_s, waist_const)
            .map_err(|e| CliError::config("units", e.to_string()))?;
        summary.insert(
            "physical_speed_m_per_s".into(),
            json!({ "linewidth_as_rate": s.rate, "linewidth_as_angular": s.angular }),
        );
    }
    Ok(())
}

fn single_run(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let proto = single_protocol(cfg)?;
    let model: NodeModel = cfg.model.into();
    let basis = model.basis(ccnode::model::Sector::SINGLE);
    let psi0 = initial_state(cfg, &basis, Some(photon_in_left(model)))?;
    if let (Some(s), Some(nu)) = (cfg.splitter, cfg.nu) {
        physical_speed(cfg, nu, s.waist_const, summary)?;
        summary.insert("nu".into(), json!(nu));
    }
    Ok(run_single_node(&proto, model, &psi0, opts)?)
}

fn unitary_json(u: &EffectiveUnitary) -> Value {
    json!({
        "a": complex(u.a),
        "b": complex(u.b),
        "c": complex(u.c),
        "d": complex(u.d),
        "abs_a": u.a.norm(),
        "abs_b": u.b.norm(),
        "transfer": u.b.norm_sqr(),
        "unitarity_defect": u.unitarity_defect(),
        "leak": u.leak,
        "peak_intermediate": u.peak_intermediate,
        "peak_excited": u.peak_excited,
        "warning": u.warning(),
    })
}

fn unitary(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let proto = single_protocol(cfg)?;
    let u = effective_unitary(&proto, opts)?;
    summary.insert("unitary".into(), unitary_json(&u));
    if let (Some(s), Some(nu)) = (cfg.splitter, cfg.nu) {
        physical_speed(cfg, nu, s.waist_const, summary)?;
        summary.insert("nu".into(), json!(nu));
    }
    Ok(run_single_node(&proto, NodeModel::Full, &photon_in_left(NodeModel::Full), opts)?)
}

fn row_json(r: &SweepRow) -> Value {
    json!({
        "nu": r.nu,
        "abs_a": r.abs_a,
        "abs_b": r.abs_b,
        "unitarity_defect": r.defect,
        "peak_intermediate": r.peak_intermediate,
        "peak_excited": r.peak_excited,
    })
}

fn sweep(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<SweepTable, CliError> {
    let template: SplitterTemplate = cfg.splitter.expect("checked at load").into();
    let spec = cfg.sweep.expect("checked at load");
    let [lo, hi] = spec.range;
    let table = velocity_sweep(&template, (lo, hi), spec.points, spec.spacing.into(), opts)?;
    let failed: Vec<Value> =
        table.rows.iter().filter(|r| !r.ok()).map(|r| json!({ "nu": r.nu, "error": r.error })).collect();
    let flagged = table.rows.iter().filter(|r| r.ok() && r.flagged()).count();
    summary.insert("points".into(), json!(table.rows.len()));
    summary.insert("flagged_non_unitary".into(), json!(flagged));
    summary.insert("failed".into(), Value::Array(failed));
    summary.insert("best_router".into(), table.best_router().map_or(Value::Null, row_json));
    summary.insert("best_balanced".into(), table.best_balanced().map_or(Value::Null, row_json));
    summary.insert("max_adjacent_abs_b_change".into(), json!(table.max_adjacent_change(lo, hi)));
    Ok(table)
}

fn calibration_json(c: &Calibration) -> Value {
    json!({
        "nu": c.nu,
        "transfer": c.transfer(),
        "evaluations": c.evaluations,
        "bracket": [c.bracket.0, c.bracket.1],
        "unitary": unitary_json(&c.unitary),
    })
}

fn calibrate(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let template: SplitterTemplate = cfg.splitter.expect("checked at load").into();
    let spec = cfg.calibrate.expect("checked at load");
    let cal = calibrate_velocity(&template, spec.target(), (spec.range[0], spec.range[1]), spec.tol, opts)?;
    summary.insert("calibration".into(), calibration_json(&cal));
    summary.insert("nu".into(), json!(cal.nu));
    physical_speed(cfg, cal.nu, template.waist_const, summary)?;
    let proto = template.protocol(cal.nu)?;
    Ok(run_single_node(&proto, NodeModel::Full, &photon_in_left(NodeModel::Full), opts)?)
}

fn two_node(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let schedule = cfg.network.expect("checked at load").schedule();
    let proto = schedule.protocol().map_err(|e| CliError::config("network", e.to_string()))?;
    let basis = ccnode::two_node::two_node_basis();
    let psi0 = initial_state(cfg, &basis, None)?;
    let tr = run_protocol_two_node(&proto, &psi0, opts)?;
    let triple = tr
        .states
        .iter()
        .flat_map(|s| DECOUPLED_TRIPLE.iter().map(move |&i| s[i - 1].norm()))
        .fold(0.0, f64::max);
    summary.insert("window".into(), json!([proto.t_start(), proto.t_end()]));
    summary.insert("max_decoupled_amplitude".into(), json!(triple));
    Ok(tr)
}

fn linewidth(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let proto = single_protocol(cfg)?;
    let basis = NodeModel::Full.basis(ccnode::model::Sector::SINGLE);
    let psi0 = initial_state(cfg, &basis, Some(photon_in_left(NodeModel::Full)))?;
    let tr = run_single_node(&proto, NodeModel::Full, &psi0, opts)?;
    let spec = cfg.linewidth.unwrap_or_default();
    let fit = extract_decay_rate(&tr, spec.fit_window.map(|[a, b]| (a, b)))
        .map_err(|e| CliError::config("linewidth.fit_window", e.to_string()))?;
    let at = spec.at.unwrap_or(0.5 * (proto.t_start() + proto.t_end()));
    let params = proto.nodes()[0].params_at(at);
    let variant = |v| -> Value {
        match effective_linewidths(&params, v) {
            Ok((l, r)) => json!({ "kappa_l_eff": l, "kappa_r_eff": r }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    };
    summary.insert(
        "decay_fit".into(),
        json!({
            "rate": fit.rate,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "rms_residual": fit.rms_residual,
            "points": fit.points,
            "monotone": fit.monotone,
        }),
    );
    summary.insert(
        "effective_linewidths".into(),
        json!({ "at": at, "physical": variant(LinewidthVariant::Physical), "as_printed": variant(LinewidthVariant::AsPrinted) }),
    );
    Ok(tr)
}

fn stationary(cfg: &Config, opts: &IntegratorOptions, summary: &mut Map<String, Value>) -> Result<Trajectory, CliError> {
    let ramp: StationaryRamp = cfg.stationary.unwrap_or_default().into();
    let out = ramp.run(opts).map_err(|e| match e {
        ccnode::Error::InvalidParameter { .. } => CliError::config("stationary", e.to_string()),
        other => other.into(),
    })?;
    summary.insert("transfer".into(), json!(out.transfer));
    summary.insert("peak_excited".into(), json!(out.peak_excited));
    Ok(out.trajectory)
}
