use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use taptrap::analysis::{
    compensate, compensation_metric, fit_eq1, micromotion_metric, peak_frequency, periodogram, scan_axial,
    AnalyticFamily, AxialScanOptions, CompensationOptions, ScanColumn, ScanResult,
};
use taptrap::dynamics::{simulate, ForceConfig, IonState};
use taptrap::trapmodel::{
    calibrate_drive, find_equilibrium, mathieu_parameters, radial_freq_eq1_pitch, secular_frequencies,
    AnalyticField, DriveConfig, IonSpecies, TrapGeometry,
};
use taptrap::Vec3;

fn ion() -> IonSpecies {
    IonSpecies::calcium40()
}

fn calibrated() -> DriveConfig {
    calibrate_drive(&TrapGeometry::default(), &ion(), &DriveConfig::default(), TAU * 1.14e6, TAU * 99.8e3).unwrap()
}

fn family() -> AnalyticFamily {
    AnalyticFamily { geometry: TrapGeometry::default() }
}

fn sine(freqs: &[f64], amps: &[f64], dt: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            freqs.iter().zip(amps).map(|(f, a)| a * (TAU * f * t).sin()).sum()
        })
        .collect()
}

#[test]
fn two_tones_eight_khz_apart_are_resolved() {
    let dt = 1.0 / 4.8e6;
    let n = (0.1 / dt) as usize;
    let signal = sine(&[1.14e6, 1.148e6], &[1.0, 0.7], dt, n);
    let spec = periodogram(&signal, dt).unwrap();
    assert!(spec.resolution < 11.0);
    let a = peak_frequency(&spec, (1.13e6, 1.144e6)).unwrap();
    let b = peak_frequency(&spec, (1.144e6, 1.16e6)).unwrap();
    assert!((a.frequency - 1.14e6).abs() < spec.resolution, "{}", a.frequency);
    assert!((b.frequency - 1.148e6).abs() < spec.resolution, "{}", b.frequency);
    assert!(!a.low_confidence && !b.low_confidence);
    // power between the tones drops far below either peak
    let mid = spec.freq_axis.partition_point(|f| *f < 1.144e6);
    let peak = spec.power.iter().cloned().fold(0.0, f64::max);
    assert!(spec.power[mid] < 1e-6 * peak);
}

#[test]
fn mid_bin_tone_is_refined_to_a_twentieth_of_a_bin() {
    let dt = 1e-7;
    let n = 8192;
    let res = 1.0 / (n as f64 * dt);
    let f0 = 700.5 * res;
    let spec = periodogram(&sine(&[f0], &[1.0], dt, n), dt).unwrap();
    let p = peak_frequency(&spec, (600.0 * res, 800.0 * res)).unwrap();
    assert!((p.frequency - f0).abs() < res / 20.0, "{} bins", (p.frequency - f0) / res);
    assert!(p.uncertainty >= res / 10.0);
}

#[test]
fn peak_frequency_ignores_the_amplitude_scale() {
    let dt = 1e-7;
    let n = 4096;
    let signal = sine(&[1.234e6], &[1e-6], dt, n);
    let reference = peak_frequency(&periodogram(&signal, dt).unwrap(), (1.0e6, 1.5e6)).unwrap().frequency;
    for c in [0.125, 2.0, 1024.0, 3.0, 1e-3, 7.7e5] {
        let scaled: Vec<f64> = signal.iter().map(|x| x * c).collect();
        let f = peak_frequency(&periodogram(&scaled, dt).unwrap(), (1.0e6, 1.5e6)).unwrap().frequency;
        if (c as f64).log2().fract() == 0.0 {
            assert_eq!(f.to_bits(), reference.to_bits(), "factor {c}");
        } else {
            assert!((f / reference - 1.0).abs() < 1e-12, "factor {c}");
        }
    }
}

#[test]
fn white_noise_band_is_low_confidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let signal: Vec<f64> = (0..8192).map(|_| normal.sample(&mut rng)).collect();
    let spec = periodogram(&signal, 1e-6).unwrap();
    let p = peak_frequency(&spec, (1e5, 3e5)).unwrap();
    assert!(p.low_confidence, "{} dB", p.prominence_db);
}

fn scan_of(z: &[f64], nu: &[f64]) -> ScanResult {
    let mut s = ScanResult::new("z", "m", z.to_vec());
    let mut c = ScanColumn::new("nu_x", "Hz", z.len());
    c.values = nu.to_vec();
    s.measured.push(c);
    s
}

fn grid() -> Vec<f64> {
    (0..16).map(|i| -50e-6 + 10e-6 * i as f64).collect()
}

#[test]
fn noisy_scan_recovers_the_taper_pitch() {
    let p_true = 10f64.to_radians().tan() / 0.6389e-3;
    let w0 = TAU * 1.14e6;
    let z = grid();
    let seeds = 200;
    let mut total = 0.0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 2e-3).unwrap();
        let nu: Vec<f64> = z
            .iter()
            .map(|z| radial_freq_eq1_pitch(*z, w0, p_true).unwrap() / TAU * (1.0 + noise.sample(&mut rng)))
            .collect();
        let fit = fit_eq1(&scan_of(&z, &nu)).unwrap();
        assert!(fit.axes[0].converged);
        total += fit.axes[0].p;
    }
    let mean = total / seeds as f64;
    assert!((mean / p_true - 1.0).abs() < 0.03, "{} per mm", mean * 1e-3);
    assert!((p_true * 1e-3 - 0.276).abs() < 5e-4);
}

#[test]
fn flat_data_gives_a_pitch_consistent_with_zero() {
    let z = grid();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let noise = Normal::new(0.0, 1e-3).unwrap();
        let nu: Vec<f64> = z.iter().map(|_| 1.14e6 * (1.0 + noise.sample(&mut rng))).collect();
        let a = &fit_eq1(&scan_of(&z, &nu)).unwrap().axes[0];
        assert!(a.p_err > 0.0);
        assert!(a.p.abs() < 4.0 * a.p_err, "seed {seed}: {} +- {}", a.p, a.p_err);
    }
}

#[test]
fn resting_ion_at_the_null_has_no_micromotion() {
    let ion = ion();
    let model = AnalyticField::new(TrapGeometry::default(), calibrated()).unwrap();
    let dt = model.drive().rf_period() / 200.0;
    let traj = simulate(&model, &ion, &IonState::at_rest(Vec3::zeros()), 200.0 * model.drive().rf_period(), dt, &ForceConfig::default(), 5)
        .unwrap();
    // thermal velocity scale at 1 mK
    let thermal = (taptrap::constants::BOLTZMANN * 1e-3 / ion.mass).sqrt();
    assert!(micromotion_metric(&traj, model.drive().omega_rf).unwrap() < 1e-6 * thermal);
}

#[test]
fn displaced_ion_matches_first_order_micromotion() {
    let ion = ion();
    let base = calibrated();
    let null_model = AnalyticField::new(TrapGeometry::default(), base.clone()).unwrap();
    let wx = secular_frequencies(&null_model, &ion, 0.0).unwrap().omega_x();
    let q = mathieu_parameters(&null_model, &ion, 0.0).unwrap().q_x;
    // stray field that pushes the ion 1 um along x
    let e = ion.mass * wx * wx * 1e-6 / ion.charge;
    let drive = DriveConfig { stray_field: [e, 0.0, 0.0], ..base.clone() };
    let model = AnalyticField::new(TrapGeometry::default(), drive.clone()).unwrap();
    let eq = find_equilibrium(&model, &ion, &Vec3::zeros()).unwrap();
    assert!((eq.x - 1e-6).abs() < 2e-8, "{}", eq.x);
    let dt = drive.rf_period() / 200.0;
    let mut traj =
        simulate(&model, &ion, &IonState::at_rest(eq), 200.0 * drive.rf_period(), dt, &ForceConfig::default(), 5).unwrap();
    let metric = micromotion_metric(&traj, drive.omega_rf).unwrap();
    let predicted = eq.x * q / 2.0 * drive.omega_rf;
    assert!((metric / predicted - 1.0).abs() < 0.05, "{metric} vs {predicted}");

    for s in &mut traj.samples {
        s.velocity = -s.velocity;
    }
    let reversed = micromotion_metric(&traj, drive.omega_rf).unwrap();
    assert!((reversed - metric).abs() <= 1e-12 * metric);
}

fn opts() -> CompensationOptions {
    CompensationOptions::default()
}

#[test]
fn compensation_without_stray_field_stays_at_zero() {
    let r = compensate(&family(), &ion(), &calibrated(), (-100.0, 100.0), (-100.0, 100.0), &opts()).unwrap();
    assert!(r.dv13.abs() < 0.1 && r.dv24.abs() < 0.1, "{} {}", r.dv13, r.dv24);
    assert!(!r.on_boundary);
}

#[test]
fn compensation_cancels_a_stray_field_linearly() {
    let ion = ion();
    let stray = |e: f64| DriveConfig { stray_field: [e, 0.4 * e, 0.0], ..calibrated() };
    let displacement = |d: &DriveConfig| {
        let m = AnalyticField::new(TrapGeometry::default(), d.clone()).unwrap();
        let eq = find_equilibrium(&m, &ion, &Vec3::zeros()).unwrap();
        eq.x.hypot(eq.y)
    };
    let base = stray(10.0);
    let r1 = compensate(&family(), &ion, &base, (-100.0, 100.0), (-100.0, 100.0), &opts()).unwrap();
    assert!(r1.converged && !r1.on_boundary);
    // opposite electrodes move with opposite sign
    assert!(r1.dv13 * r1.dv24 < 0.0, "{} {}", r1.dv13, r1.dv24);
    let mut fixed = base.clone();
    fixed.set_compensation(base.comp_common(), r1.dv13, r1.dv24);
    assert!(displacement(&fixed) < 0.01 * displacement(&base), "{:e} vs {:e}", displacement(&fixed), displacement(&base));

    let r2 = compensate(&family(), &ion, &stray(20.0), (-100.0, 100.0), (-100.0, 100.0), &opts()).unwrap();
    assert!((r2.dv13 / r1.dv13 - 2.0).abs() < 0.04, "{} / {}", r2.dv13, r1.dv13);
    assert!((r2.dv24 / r1.dv24 - 2.0).abs() < 0.04, "{} / {}", r2.dv24, r1.dv24);

    let wide = compensate(&family(), &ion, &base, (-200.0, 200.0), (-200.0, 200.0), &opts()).unwrap();
    assert!((wide.dv13 - r1.dv13).abs() < 0.2 && (wide.dv24 - r1.dv24).abs() < 0.2);
}

#[test]
fn box_edge_optimum_is_flagged() {
    let base = DriveConfig { stray_field: [10.0, 0.0, 0.0], ..calibrated() };
    // the optimum sits near dv13 = 3.5 V, outside this box
    let r = compensate(&family(), &ion(), &base, (-2.0, 2.0), (-20.0, 20.0), &opts()).unwrap();
    assert!(r.on_boundary);
}

#[test]
fn metric_is_smaller_at_the_optimum() {
    let ion = ion();
    let base = DriveConfig { stray_field: [10.0, 0.0, 0.0], ..calibrated() };
    let o = opts();
    // +-dV on opposite electrodes: field beta 2 sqrt2 dV along x
    let c = 10.0 / (2.0 * 2f64.sqrt());
    let off = compensation_metric(&family(), &ion, &base, [0.0, 0.0], &o).unwrap();
    let on = compensation_metric(&family(), &ion, &base, [c, -c], &o).unwrap();
    assert!(on < 0.01 * off, "{on:e} vs {off:e}");
}

#[test]
fn mode_labels_follow_the_eigenvectors() {
    let ion = ion();
    let z: Vec<f64> = (0..6).map(|i| -50e-6 + 30e-6 * i as f64).collect();
    let opts = AxialScanOptions { duration: 0.5e-3, ..AxialScanOptions::default() };
    let scan = scan_axial(&family(), &ion, &calibrated(), &z, TAU * 99.8e3, &opts).unwrap();
    assert!(scan.point_errors.iter().all(Option::is_none));
    let (nx, ny) = (&scan.measured[0].values, &scan.measured[1].values);
    for i in 0..z.len() {
        assert!(ny[i] > nx[i], "labels swapped at z = {}", z[i]);
        if i > 0 {
            assert!(nx[i] > nx[i - 1] && ny[i] > ny[i - 1]);
        }
    }
}
