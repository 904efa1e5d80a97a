use ccnode::analysis::{
    calibrate_velocity, calibrate_velocity_near, extract_decay_rate, velocity_sweep, CalibrationTarget, Spacing,
    StationaryRamp,
};
use ccnode::dynamics::{photon_in_left, run_single_node, NodeModel};
use ccnode::presets::SplitterTemplate;
use ccnode::propagator::{effective_unitary, IntegratorOptions};
use ccnode::Error;

fn opts() -> IntegratorOptions {
    IntegratorOptions::default()
}

#[test]
fn fast_transit_leaves_photon_in_place() {
    let template = SplitterTemplate::default();
    let u = effective_unitary(&template.protocol(1e4).unwrap(), &opts()).unwrap();
    assert!(u.b.norm_sqr() < 1e-3, "|B|^2 = {}", u.b.norm_sqr());
    assert!(u.a.norm_sqr() > 0.99, "|A|^2 = {}", u.a.norm_sqr());
    assert!(u.warning().is_none());
}

#[test]
fn calibration_without_coupling_returns_range_midpoint() {
    let template = SplitterTemplate { g0: 0.0, ..SplitterTemplate::default() };
    let cal = calibrate_velocity(&template, CalibrationTarget::Custom(0.0), (4.0, 8.0), 1e-3, &opts()).unwrap();
    assert!((cal.nu - 6.0).abs() < 1e-12);
}

#[test]
fn calibration_is_idempotent() {
    let template = SplitterTemplate::default();
    let first = calibrate_velocity(&template, CalibrationTarget::Balanced, (15.0, 30.0), 1e-3, &opts()).unwrap();
    let again = calibrate_velocity_near(&template, CalibrationTarget::Balanced, first.nu, 0.5, 1e-3, &opts()).unwrap();
    assert!((again.nu - first.nu).abs() <= 1e-3, "{} vs {}", first.nu, again.nu);
}

#[test]
fn unreachable_target_reports_missing_bracket() {
    let template = SplitterTemplate::default();
    let err = calibrate_velocity(&template, CalibrationTarget::Balanced, (200.0, 400.0), 1e-3, &opts()).unwrap_err();
    assert!(matches!(err, Error::NoBracket(_)), "{err}");
}

#[test]
fn lossless_run_shows_no_decay() {
    let tr = run_single_node(
        &SplitterTemplate::default().protocol(10.0).unwrap(),
        NodeModel::Full,
        &photon_in_left(NodeModel::Full),
        &opts(),
    )
    .unwrap();
    let fit = extract_decay_rate(&tr, None).unwrap();
    assert!(fit.rate.abs() <= 1e-8, "rate {}", fit.rate);
}

#[test]
fn stationary_ramp_transfers_only_when_slow() {
    let slow = StationaryRamp::default().run(&opts()).unwrap();
    assert!(slow.transfer >= 0.99, "slow {}", slow.transfer);
    let fast = StationaryRamp { duration: 2.0, ..StationaryRamp::default() }.run(&opts()).unwrap();
    assert!(fast.transfer < 0.05, "fast {}", fast.transfer);
    let none = StationaryRamp { duration: 0.0, ..StationaryRamp::default() }.run(&opts()).unwrap();
    assert_eq!(none.transfer, 0.0);
    assert_eq!(none.trajectory.len(), 1);
}

#[test]
fn sweep_is_continuous_in_adiabatic_range() {
    let table = velocity_sweep(&SplitterTemplate::default(), (7.0, 40.0), 170, Spacing::Linear, &opts()).unwrap();
    assert!(table.rows.iter().all(|r| r.ok()));
    let jump = table.max_adjacent_change(7.0, 40.0);
    assert!(jump < 0.05, "max adjacent |B| change {jump}");
}

#[test]
#[ignore = "blocked: below nu of about 7 the transit is non-adiabatic and |B| changes by up to 0.18 between 200-point grid neighbours"]
fn sweep_is_continuous_over_full_range() {
    let table = velocity_sweep(&SplitterTemplate::default(), (1.0, 40.0), 200, Spacing::Linear, &opts()).unwrap();
    let jump = table.max_adjacent_change(1.0, 40.0);
    assert!(jump < 0.05, "max adjacent |B| change {jump}");
}

#[test]
fn log_sweep_reports_every_point() {
    let table = velocity_sweep(&SplitterTemplate::default(), (5.0, 50.0), 8, Spacing::Log, &opts()).unwrap();
    assert_eq!(table.rows.len(), 8);
    assert!((table.rows[0].nu - 5.0).abs() < 1e-12 && (table.rows[7].nu - 50.0).abs() < 1e-9);
}
