use ccnode::analysis::{extract_decay_rate, fidelity};
use ccnode::dynamics::{photon_in_left, run_single_node, NodeModel, Reversed, SingleNodeGenerator};
use ccnode::model::{dark_state_full, NodeStatics, Sector, EL, ER, FL, FM, FR};
use ccnode::presets::SplitterTemplate;
use ccnode::propagator::{effective_unitary, integrate, IntegratorOptions};
use ccnode::pulse::{Channel, NodeDrive, PulseProfile, PulseProtocol};
use ccnode::StateVector;

fn template() -> SplitterTemplate {
    SplitterTemplate::default()
}

fn constant_drive(g: f64, omega_l: f64, omega_r: f64, statics: NodeStatics) -> NodeDrive {
    let c = |a: f64| Some(Channel::from(PulseProfile::constant(a)));
    NodeDrive { omega_l: c(omega_l), omega_r: c(omega_r), g_l: c(g), g_r: c(g), statics }
}

#[test]
fn lossless_runs_conserve_norm() {
    for nu in [3.0, 10.0, 20.0, 35.0] {
        for model in [NodeModel::Full, NodeModel::ThreeLevel, NodeModel::BeamSplitter] {
            let proto = match model {
                NodeModel::BeamSplitter => template().driven_window(nu, 0.1).unwrap(),
                _ => template().protocol(nu).unwrap(),
            };
            let tr = run_single_node(&proto, model, &photon_in_left(model), &IntegratorOptions::default()).unwrap();
            let drift = tr.norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
            assert!(drift < 1e-8, "nu {nu}, {model:?}: drift {drift:e}");
        }
    }
}

#[test]
fn single_excitation_stays_in_sector() {
    let proto = template().protocol(10.0).unwrap();
    let tr = run_single_node(&proto, NodeModel::Full, &photon_in_left(NodeModel::Full), &IntegratorOptions::default())
        .unwrap();
    for s in &tr.states {
        let total: f64 = [FL, FR, FM, EL, ER].iter().map(|&i| s[i].norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-8);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let proto = template().protocol(15.0).unwrap();
    let psi0 = photon_in_left(NodeModel::Full);
    let finals: Vec<_> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let r = run_single_node(&proto, NodeModel::Full, &psi0, &IntegratorOptions::fixed(dt).with_samples(2)).unwrap();
            r.final_state().amplitudes().clone()
        })
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| (&w[0] - &w[1]).norm()).collect();
    for pair in diffs.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}, differences {diffs:?}");
    }
}

#[test]
fn fixed_step_agrees_with_adaptive() {
    let proto = template().protocol(20.0).unwrap();
    let psi0 = photon_in_left(NodeModel::Full);
    let a = run_single_node(&proto, NodeModel::Full, &psi0, &IntegratorOptions::default()).unwrap();
    let f = run_single_node(&proto, NodeModel::Full, &psi0, &IntegratorOptions::fixed(0.005)).unwrap();
    assert!((a.final_state().amplitudes() - f.final_state().amplitudes()).norm() < 1e-7);
}

#[test]
fn reversed_propagation_returns_initial_state() {
    let proto = template().protocol(12.0).unwrap();
    let gen = SingleNodeGenerator::new(&proto, NodeModel::Full);
    let (t0, t1) = (proto.t_start(), proto.t_end());
    let opts = IntegratorOptions::default().with_tolerances(1e-12, 1e-14).with_samples(2);
    let psi0 = photon_in_left(NodeModel::Full);
    let forward = integrate(&gen, &gen.basis(), &psi0, t0, t1, &opts).unwrap();
    let back = Reversed::new(&gen, t0, t1);
    let returned = integrate(&back, &gen.basis(), forward.final_state(), t0, t1, &opts).unwrap();
    assert!(fidelity(returned.final_state(), &psi0).unwrap() > 1.0 - 1e-9);
}

#[test]
fn no_pulses_gives_identity() {
    let drive = NodeDrive { statics: NodeStatics::detuned(50.0), ..NodeDrive::default() };
    let proto = PulseProtocol::single_node(drive, 0.0, 100.0).unwrap();
    let u = effective_unitary(&proto, &IntegratorOptions::default()).unwrap();
    assert!((u.a.norm() - 1.0).abs() < 1e-12 && (u.d.norm() - 1.0).abs() < 1e-12);
    assert!(u.b.norm() < 1e-12 && u.c.norm() < 1e-12);
    assert!(u.unitarity_defect() < 1e-10);
}

#[test]
fn parked_photon_decays_exponentially() {
    let statics = NodeStatics::detuned(50.0).with_losses(0.4, 1.0);
    let proto = PulseProtocol::single_node(NodeDrive { statics, ..NodeDrive::default() }, 0.0, 10.0).unwrap();
    let tr = run_single_node(&proto, NodeModel::Full, &photon_in_left(NodeModel::Full), &IntegratorOptions::default())
        .unwrap();
    for (t, s) in tr.times.iter().zip(&tr.states) {
        assert!((s[FL].norm_sqr() - (-0.4 * t).exp()).abs() < 1e-9);
    }
    let fit = extract_decay_rate(&tr, None).unwrap();
    assert!((fit.rate - 0.4).abs() < 1e-6 && fit.monotone);
}

#[test]
fn dark_state_outlives_bright_state_under_excited_decay() {
    let statics = NodeStatics::detuned(0.0).with_losses(0.0, 1.0);
    let drive = constant_drive(3.0, 4.0, 4.0, statics);
    let proto = PulseProtocol::single_node(drive, 0.0, 20.0).unwrap();
    let dark = dark_state_full(&drive.params_at(0.0), Sector::SINGLE).unwrap();
    let bright = StateVector::basis(5, EL);
    let opts = IntegratorOptions::default();
    let dark_final = run_single_node(&proto, NodeModel::Full, &dark, &opts).unwrap().final_state().norm_sqr();
    let bright_final = run_single_node(&proto, NodeModel::Full, &bright, &opts).unwrap().final_state().norm_sqr();
    assert!((dark_final - 1.0).abs() < 1e-9, "dark {dark_final}");
    assert!(bright_final < 0.5, "bright {bright_final}");
}

#[test]
fn loss_increases_monotonically_with_kappa() {
    let finals: Vec<f64> = [0.0, 0.05, 0.1, 0.2]
        .iter()
        .map(|&kappa| {
            let t = SplitterTemplate { kappa, gamma: 1.0, ..template() };
            let tr = run_single_node(
                &t.protocol(10.13).unwrap(),
                NodeModel::Full,
                &photon_in_left(NodeModel::Full),
                &IntegratorOptions::default().with_samples(2),
            )
            .unwrap();
            tr.final_state().norm_sqr()
        })
        .collect();
    assert!(finals.windows(2).all(|w| w[1] < w[0]), "{finals:?}");
}

#[test]
fn intermediate_speed_splits_the_photon() {
    let tr = run_single_node(
        &template().protocol(20.2613).unwrap(),
        NodeModel::Full,
        &photon_in_left(NodeModel::Full),
        &IntegratorOptions::default(),
    )
    .unwrap();
    let s = tr.final_state();
    assert!((s[FL].norm_sqr() - 0.5).abs() < 0.02 && (s[FR].norm_sqr() - 0.5).abs() < 0.02);
}

#[test]
fn samples_cover_window_uniformly() {
    let proto = template().protocol(10.0).unwrap();
    let tr = run_single_node(
        &proto,
        NodeModel::ThreeLevel,
        &photon_in_left(NodeModel::ThreeLevel),
        &IntegratorOptions::default().with_samples(11),
    )
    .unwrap();
    assert_eq!(tr.len(), 11);
    assert_eq!(tr.times[0], proto.t_start());
    assert!((tr.final_time() - proto.t_end()).abs() < 1e-9);
}
