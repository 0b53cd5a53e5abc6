use std::f64::consts::TAU;

use taptrap::analysis::{compensation_metric, peak_frequency, power_spectrum, AnalyticFamily, CompensationOptions};
use taptrap::constants::BOLTZMANN;
use taptrap::dynamics::{
    excitation_sweep, simulate, ForceConfig, IonState, Propagator, SweepConfig, SweepDirection,
};
use taptrap::trapmodel::{
    calibrate_drive, mathieu_parameters, secular_frequencies, AnalyticField, DriveConfig, FieldModel,
    HarmonicField, IonSpecies, TrapGeometry,
};
use taptrap::Vec3;

fn ion() -> IonSpecies {
    IonSpecies::calcium40()
}

fn calibrated() -> DriveConfig {
    calibrate_drive(&TrapGeometry::default(), &ion(), &DriveConfig::default(), TAU * 1.14e6, TAU * 99.8e3).unwrap()
}

fn energy(field: &HarmonicField, ion: &IonSpecies, s: &IonState) -> f64 {
    s.kinetic_energy(ion.mass) + ion.charge * field.static_potential(&s.position).unwrap()
}

#[test]
fn static_trap_energy_does_not_drift() {
    let ion = ion();
    let omega = TAU * 1e6;
    let field = HarmonicField::isotropic(omega, ion.charge_to_mass());
    let per_period = 1000;
    let dt = TAU / omega / per_period as f64;
    let mut p = Propagator::new(&field, &ion, &ForceConfig::default());
    let mut s = IonState::new(Vec3::new(1e-6, 0.0, -0.5e-6), Vec3::new(0.0, 3.0, 1.0), 0.0);
    let periods = 1000;
    let mut means = Vec::new();
    let mut spread: f64 = 0.0;
    let e0 = energy(&field, &ion, &s);
    for k in 0..periods {
        let mut acc = 0.0;
        for _ in 0..per_period {
            s = p.step(&s, dt).unwrap();
            let e = energy(&field, &ion, &s);
            acc += e;
            spread = spread.max((e - e0).abs() / e0);
        }
        if k == 0 || k == periods - 1 {
            means.push(acc / per_period as f64);
        }
    }
    // drift is the change of the period-averaged energy; the bounded
    // oscillation within a period is of order (omega dt)^2 / 4
    let drift = (means[1] - means[0]).abs() / means[0];
    assert!(drift < 1e-6, "drift {drift:e}");
    assert!(spread < 2e-5, "oscillation {spread:e}");
}

#[test]
fn harmonic_period_is_accurate() {
    let ion = ion();
    let omega = TAU * 250e3;
    let field = HarmonicField::isotropic(omega, ion.charge_to_mass());
    let dt = TAU / omega / 1000.0;
    let mut p = Propagator::new(&field, &ion, &ForceConfig::default());
    let mut s = IonState::at_rest(Vec3::new(2e-6, 0.0, 0.0));
    let mut crossings = Vec::new();
    while crossings.len() < 101 {
        let next = p.step(&s, dt).unwrap();
        // upward zero crossings of v_x, interpolated linearly
        if s.velocity.x < 0.0 && next.velocity.x >= 0.0 {
            let f = -s.velocity.x / (next.velocity.x - s.velocity.x);
            crossings.push(s.time + f * dt);
        }
        s = next;
    }
    let period = (crossings[100] - crossings[0]) / 100.0;
    let exact = TAU / omega;
    assert!((period - exact).abs() / exact < 1e-4, "{period} vs {exact}");
}

#[test]
fn verlet_is_time_reversible_in_the_rf_field() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 200.0;
    let start = IonState::new(Vec3::new(3e-6, -2e-6, 5e-6), Vec3::new(1.5, -0.7, 0.3), 0.0);
    let mut p = Propagator::new(&model, &ion, &ForceConfig::default());
    let mut s = start;
    for _ in 0..100 {
        s = p.step(&s, dt).unwrap();
    }
    for _ in 0..100 {
        s = p.step(&s, -dt).unwrap();
    }
    assert!((s.position - start.position).norm() < 1e-9, "{:e}", (s.position - start.position).norm());
    assert!(s.time.abs() < 1e-18);
}

#[test]
fn ion_at_the_rf_null_stays_there() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 200.0;
    let traj = simulate(&model, &ion, &IonState::at_rest(Vec3::zeros()), 1e-3, dt, &ForceConfig::default(), 100).unwrap();
    assert!(!traj.escaped);
    let worst = traj.samples.iter().map(|s| s.position.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn sample_count_and_spacing() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 100.0;
    let duration = 1234.0 * dt;
    let traj = simulate(&model, &ion, &IonState::at_rest(Vec3::new(1e-6, 0.0, 0.0)), duration, dt, &ForceConfig::default(), 7)
        .unwrap();
    assert_eq!(traj.len(), 1234 / 7 + 1);
    let t = traj.times();
    for w in t.windows(2) {
        assert!(((w[1] - w[0]) / (7.0 * dt) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn radial_fft_peak_matches_the_hessian_prediction() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 200.0;
    let traj = simulate(&model, &ion, &IonState::at_rest(Vec3::new(1e-6, 0.0, 0.0)), 1e-3, dt, &ForceConfig::default(), 25)
        .unwrap();
    let spec = power_spectrum(&traj, 0).unwrap();
    let peak = peak_frequency(&spec, (1.0e6, 1.3e6)).unwrap();
    let hessian = secular_frequencies(&model, &ion, 0.0).unwrap().omega_x() / TAU;
    assert!((peak.frequency - hessian).abs() / hessian < 0.02, "{} vs {hessian}", peak.frequency);
    assert!(!peak.low_confidence);
}

#[test]
fn drag_cools_at_twice_the_damping_rate() {
    let ion = ion();
    let field = HarmonicField { curvature: [0.0; 3], omega_rf: TAU * 1e3, radius: 1.0 };
    let rate = TAU * 20e3;
    let forces = ForceConfig::default().with_damping_rate(rate, ion.mass);
    let v = (3.0 * BOLTZMANN * 500.0 / ion.mass).sqrt();
    let start = IonState::new(Vec3::zeros(), Vec3::new(v, v, v) / 3f64.sqrt(), 0.0);
    let dt = 1e-8;
    let traj = simulate(&field, &ion, &start, 50e-6, dt, &forces, 100).unwrap();
    let e: Vec<f64> = traj.samples.iter().map(|s| s.kinetic_energy(ion.mass)).collect();
    let (t0, t1) = (traj.samples[0].time, traj.samples.last().unwrap().time);
    let fitted = (e[0] / e[e.len() - 1]).ln() / (t1 - t0);
    let expected = 2.0 * forces.drag_coefficient / ion.mass;
    assert!((fitted - expected).abs() / expected < 0.05, "{fitted} vs {expected}");
}

#[test]
fn trajectories_are_bit_identical_per_seed() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 100.0;
    let forces = ForceConfig { kick_rate: 2e6, kick_momentum: 1e-27, rng_seed: 11, ..ForceConfig::default() }
        .with_damping_rate(TAU * 5e3, ion.mass);
    let start = IonState::at_rest(Vec3::new(1e-6, 1e-6, 0.0));
    let run = |f: &ForceConfig| simulate(&model, &ion, &start, 50e-6, dt, f, 10).unwrap();
    let (a, b) = (run(&forces), run(&forces));
    assert_eq!(a.samples, b.samples);
    let c = run(&ForceConfig { rng_seed: 12, ..forces.clone() });
    assert_ne!(a.samples, c.samples);
}

#[test]
fn micromotion_grows_linearly_with_a_stray_field() {
    let ion = ion();
    let base = calibrated();
    let family = AnalyticFamily { geometry: TrapGeometry::default() };
    let model = AnalyticField::new(TrapGeometry::default(), base.clone()).unwrap();
    let wx = secular_frequencies(&model, &ion, 0.0).unwrap().omega_x();
    let q = mathieu_parameters(&model, &ion, 0.0).unwrap().q_x;
    let opts = CompensationOptions::default();
    for e in [5.0, 10.0, 20.0] {
        let drive = DriveConfig { stray_field: [e, 0.0, 0.0], ..base.clone() };
        let metric = compensation_metric(&family, &ion, &drive, [0.0, 0.0], &opts).unwrap();
        // displacement q E / (m w^2), driven at Omega with relative amplitude q/2
        let x0 = ion.charge * e / (ion.mass * wx * wx);
        let predicted = x0 * q / 2.0 * base.omega_rf;
        assert!((metric - predicted).abs() / predicted < 0.05, "E = {e}: {metric:e} vs {predicted:e}");
    }
}

#[test]
fn weak_axial_drive_peaks_at_the_axial_frequency() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let forces = ForceConfig { mod_force_amp: 2e-22, mod_direction: Vec3::z(), ..ForceConfig::default() }
        .with_damping_rate(TAU * 1e3, ion.mass);
    let step = 0.5e3;
    let freqs: Vec<f64> = (0..12).map(|i| TAU * (97e3 + step * i as f64)).collect();
    let config = SweepConfig { dt: Some(model.drive().rf_period() / 100.0), ..SweepConfig::default() };
    let r = excitation_sweep(&model, &ion, &forces, &freqs, SweepDirection::Up, &IonState::at_rest(Vec3::zeros()), &config)
        .unwrap();
    assert!(!r.escaped);
    let best = r.points.iter().max_by(|a, b| a.amplitude[2].total_cmp(&b.amplitude[2])).unwrap();
    let f = best.mod_freq / TAU;
    assert!((f - 99.8e3).abs() <= step, "peak at {f}");
}

#[test]
fn zero_modulation_leaves_the_ion_at_rest() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let freqs = [TAU * 1.13e6, TAU * 1.15e6];
    let config = SweepConfig { settle_periods: 20.0, dt: Some(model.drive().rf_period() / 100.0), ..SweepConfig::default() };
    let forces = ForceConfig::default().with_damping_rate(TAU * 5e3, ion.mass);
    let r = excitation_sweep(&model, &ion, &forces, &freqs, SweepDirection::Up, &IonState::at_rest(Vec3::zeros()), &config)
        .unwrap();
    for p in &r.points {
        assert!(p.amplitude.iter().all(|a| *a < 1e-15), "{:?}", p.amplitude);
    }
}
