use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use taptrap::trapmodel::{
    calibrate_axis_rotation, calibrate_drive, mathieu_parameters, principal_axis_angle,
    pseudopotential, radial_freq_eq1, secular_frequencies, AnalyticField, DriveConfig, FieldModel,
    IonSpecies, TrapError, TrapGeometry,
};
use taptrap::Vec3;

fn ion() -> IonSpecies {
    IonSpecies::calcium40()
}

fn symmetric_drive() -> DriveConfig {
    DriveConfig::symmetric(TAU * 11.17e6, 95.0)
}

fn calibrated() -> DriveConfig {
    calibrate_drive(&TrapGeometry::default(), &ion(), &DriveConfig::default(), TAU * 1.14e6, TAU * 99.8e3).unwrap()
}

fn model(drive: DriveConfig) -> AnalyticField {
    AnalyticField::new(TrapGeometry::default(), drive).unwrap()
}

#[test]
fn rf_pseudopotential_vanishes_on_the_axis() {
    let m = model(symmetric_drive());
    for z in [-200e-6, 0.0, 350e-6] {
        assert_eq!(pseudopotential(&m, &ion(), &Vec3::new(0.0, 0.0, z)).unwrap().rf, 0.0);
    }
}

#[test]
fn pseudopotential_matches_finite_difference_gradient() {
    let m = model(calibrated());
    let ion = ion();
    let r = Vec3::new(10e-6, 0.0, 0.0);
    let h = 1e-7;
    let fd = |phase_part: fn(&taptrap::FieldSample) -> f64| {
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            g[i] = (phase_part(&m.sample(&(r + e)).unwrap()) - phase_part(&m.sample(&(r - e)).unwrap())) / (2.0 * h);
        }
        g
    };
    let gc = fd(|s| s.rf_cos_potential);
    let gs = fd(|s| s.rf_sin_potential);
    let w = m.omega_rf();
    let oracle = ion.charge * ion.charge * (gc.norm_squared() + gs.norm_squared()) / (4.0 * ion.mass * w * w);
    let rf = pseudopotential(&m, &ion, &r).unwrap().rf;
    assert!((rf - oracle).abs() / oracle < 1e-9, "{rf} vs {oracle}");
}

#[test]
fn degenerate_radial_modes_without_asymmetry() {
    let modes = secular_frequencies(&model(symmetric_drive()), &ion(), 0.0).unwrap();
    assert!((modes.omega_x() - modes.omega_y()).abs() / modes.omega_x() < 1e-6);
}

#[test]
fn calibrated_operating_point() {
    let d = calibrated();
    let modes = secular_frequencies(&model(d.clone()), &ion(), 0.0).unwrap();
    assert!((modes.omega_x() / TAU - 1.14e6).abs() < 1.0);
    assert!((modes.omega_z() / TAU - 99.8e3).abs() / 99.8e3 < 0.005);
    // 0.7 % asymmetry gives the observed 8 kHz splitting within 10 %
    let split = (modes.omega_y() - modes.omega_x()) / TAU;
    assert!((split - 8e3).abs() < 800.0, "{split}");
    assert!((d.rf_asymmetry() - 0.007).abs() < 1e-12);
}

#[test]
fn unstable_configuration_is_reported() {
    let mut d = symmetric_drive();
    d.v_d1 = -10.0;
    d.v_d2 = -10.0;
    let err = secular_frequencies(&model(d), &ion(), 0.0).unwrap_err();
    assert!(matches!(err, TrapError::Unstable(_)), "{err}");
}

#[test]
fn hessian_frequencies_follow_the_taper_law() {
    let g = TrapGeometry::default();
    let m = model(calibrated());
    let ion = ion();
    for i in 0..=15 {
        let z = -50e-6 + 10e-6 * i as f64;
        let modes = secular_frequencies(&m, &ion, z).unwrap();
        let w0 = secular_frequencies(&m, &ion, 0.0).unwrap();
        for k in 0..2 {
            let law = radial_freq_eq1(z, w0.omega[k], g.taper_angle, g.r0).unwrap();
            assert!((modes.omega[k] - law).abs() / law < 0.005, "z = {z}: {} vs {law}", modes.omega[k]);
        }
    }
}

#[test]
fn reversed_taper_mirrors_the_frequencies() {
    let d = calibrated();
    let m = model(d.clone());
    let g = TrapGeometry { taper_angle: -TrapGeometry::default().taper_angle, ..TrapGeometry::default() };
    let mirrored = AnalyticField::new(g, d).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..=6 {
        let z = -50e-6 + 25e-6 * i as f64;
        let a = secular_frequencies(&m, &ion(), -z).unwrap().omega_x();
        let b = secular_frequencies(&mirrored, &ion(), z).unwrap().omega_x();
        assert!((a - b).abs() / a < 1e-9);
        assert!(b < last);
        last = b;
    }
}

#[test]
fn radial_splitting_tracks_the_asymmetry() {
    for delta in [0.005, 0.01, 0.02, 0.03] {
        let d = DriveConfig::default().with_rf(60.0, delta);
        let modes = secular_frequencies(&model(d), &ion(), 0.0).unwrap();
        let mean = 0.5 * (modes.omega_x() + modes.omega_y());
        let split = (modes.omega_y() - modes.omega_x()) / mean;
        assert!((split - delta).abs() / delta < 0.05, "delta {delta}: {split}");
    }
}

#[test]
fn mathieu_q_at_the_operating_point() {
    let d = calibrated();
    let q = mathieu_parameters(&model(d.clone()), &ion(), 0.0).unwrap();
    // q ~ 2 sqrt2 nu_sec / nu_rf = 0.289
    let estimate = 2.0 * 2f64.sqrt() * 1.14 / 11.17;
    assert!((estimate - 0.2887).abs() < 1e-4);
    assert!((q.q_x - 0.289).abs() < 0.01, "{}", q.q_x);
    assert!(q.stable);
    assert_eq!(q.a_x, q.a_y);

    let mut doubled = d.clone();
    doubled.v_rf1 *= 2.0;
    doubled.v_rf2 *= 2.0;
    let q2 = mathieu_parameters(&model(doubled), &ion(), 0.0).unwrap();
    assert!((q2.q_x / q.q_x - 2.0).abs() < 1e-12);
    assert!((q2.q_y / q.q_y - 2.0).abs() < 1e-12);
}

#[test]
fn calibration_fixed_point() {
    let d = calibrated();
    let modes = secular_frequencies(&model(d.clone()), &ion(), 0.0).unwrap();
    let again = calibrate_drive(&TrapGeometry::default(), &ion(), &d, modes.omega_x(), modes.omega_z()).unwrap();
    assert!((again.v_rf1 / d.v_rf1 - 1.0).abs() < 1e-9);
    assert!((again.kappa_axial / d.kappa_axial - 1.0).abs() < 1e-9);
}

#[test]
fn doubling_the_radial_target_doubles_the_rf_amplitude() {
    // a weak axial target keeps the static defocusing negligible
    let g = TrapGeometry::default();
    let base = DriveConfig::default();
    let a = calibrate_drive(&g, &ion(), &base, TAU * 0.4e6, TAU * 10e3).unwrap();
    let b = calibrate_drive(&g, &ion(), &base, TAU * 0.8e6, TAU * 10e3).unwrap();
    assert!((b.v_rf1 / a.v_rf1 - 2.0).abs() < 2e-3, "{}", b.v_rf1 / a.v_rf1);
}

#[test]
fn calibration_beyond_stability_fails() {
    let err = calibrate_drive(&TrapGeometry::default(), &ion(), &DriveConfig::default(), TAU * 4.0e6, TAU * 99.8e3)
        .unwrap_err();
    assert!(err.to_string().contains("0.908"), "{err}");
}

#[test]
fn principal_axes() {
    let g = TrapGeometry::default();
    let d = calibrated();
    assert_eq!(principal_axis_angle(&model(d.clone()), &ion(), 0.0).unwrap(), 0.0);

    let rotated = calibrate_axis_rotation(&g, &ion(), &d, 62.5, -22.5f64.to_radians()).unwrap();
    let angle = principal_axis_angle(&model(rotated.clone()), &ion(), 0.0).unwrap();
    assert!((angle.to_degrees() + 22.5).abs() < 1e-4, "{}", angle.to_degrees());

    // without intrinsic asymmetry the x/y labels tie, so follow the softer mode
    let soft_axis_angle = |d: &DriveConfig| {
        let modes = secular_frequencies(&model(d.clone()), &ion(), 0.0).unwrap();
        let e = if modes.omega_x() < modes.omega_y() { modes.axes[0] } else { modes.axes[1] };
        let a = e.y.atan2(e.x);
        if a > PI / 2.0 { a - PI } else if a <= -PI / 2.0 { a + PI } else { a }
    };
    let mut sym = symmetric_drive();
    sym.comp.beta_quad_xy = rotated.comp.beta_quad_xy;
    sym.set_compensation(20.0, 0.0, 0.0);
    let plus = soft_axis_angle(&sym);
    sym.set_compensation(-20.0, 0.0, 0.0);
    let minus = soft_axis_angle(&sym);
    assert!((plus.abs() - PI / 4.0).abs() < 1e-6, "{plus}");
    assert!((plus + minus).abs() < 1e-9, "{plus} {minus}");

    sym.set_compensation(0.0, 0.0, 0.0);
    assert!(matches!(principal_axis_angle(&model(sym), &ion(), 0.0), Err(TrapError::UndefinedAxes { .. })));
}

#[test]
fn laplacian_residual_is_bounded_near_the_axis() {
    let d = DriveConfig::symmetric(TAU * 11.17e6, 95.0).with_rf(95.0, 0.018);
    let m = model(d.clone());
    let g = TrapGeometry::default();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for iz in -2..=4 {
        let z = 25e-6 * iz as f64;
        let curvature = 2.0 * d.v_rf_mean() / g.rho(z).powi(2);
        for ix in -2..=2 {
            for iy in -2..=2 {
                let r = Vec3::new(50e-6 * ix as f64, 50e-6 * iy as f64, z);
                let phi = |p: Vec3| m.sample(&p).unwrap().rf_cos_potential;
                let mut lap = 0.0;
                for i in 0..3 {
                    let mut e = Vec3::zeros();
                    e[i] = h;
                    lap += (phi(r + e) - 2.0 * phi(r) + phi(r - e)) / (h * h);
                }
                worst = worst.max(lap.abs() / curvature);
            }
        }
    }
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn domain_errors_name_the_failed_bound() {
    let m = model(symmetric_drive());
    let err = m.sample(&Vec3::new(0.0, 0.0, 3e-3)).unwrap_err();
    assert!(err.to_string().contains("axial"), "{err}");
    let err = m.sample(&Vec3::new(0.0, 0.65e-3, 0.0)).unwrap_err();
    assert!(err.to_string().contains("radial"), "{err}");
}

#[test]
fn rf_potential_has_the_drive_period() {
    let m = model(calibrated());
    let r = Vec3::new(30e-6, -10e-6, 20e-6);
    let t = 0.37 / 11.17e6;
    let a = m.potential(&r, t).unwrap();
    let b = m.potential(&r, t + 1.0 / 11.17e6).unwrap();
    assert!((a - b).abs() <= 1e-9 * a.abs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn doubling_the_rf_amplitude_quadruples_the_rf_term(
        x in -200e-6..200e-6f64, y in -200e-6..200e-6f64, z in -300e-6..300e-6f64,
    ) {
        let d = calibrated_cached();
        let mut d2 = d.clone();
        d2.v_rf1 *= 2.0;
        d2.v_rf2 *= 2.0;
        let r = Vec3::new(x, y, z);
        let a = pseudopotential(&model(d), &ion(), &r).unwrap().rf;
        let b = pseudopotential(&model(d2), &ion(), &r).unwrap().rf;
        prop_assert_eq!(b, 4.0 * a);
    }

    #[test]
    fn gradient_matches_central_differences(
        x in -300e-6..300e-6f64, y in -300e-6..300e-6f64, z in -400e-6..400e-6f64, t in 0.0..1e-7f64,
    ) {
        let mut d = calibrated_cached();
        d.set_compensation(5.0, 1.0, -2.0);
        d.comp.beta_quad_xy = 1e3;
        d.stray_field = [20.0, -10.0, 5.0];
        let m = model(d);
        let r = Vec3::new(x, y, z);
        let g = m.gradient(&r, t).unwrap();
        let h = 1e-8;
        let mut fd = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            fd[i] = (m.potential(&(r + e), t).unwrap() - m.potential(&(r - e), t).unwrap()) / (2.0 * h);
        }
        prop_assert!((g - fd).norm() <= 1e-6 * g.norm().max(1.0), "{:?} vs {:?}", g, fd);
    }
}

fn calibrated_cached() -> DriveConfig {
    static CELL: std::sync::OnceLock<DriveConfig> = std::sync::OnceLock::new();
    CELL.get_or_init(calibrated).clone()
}
