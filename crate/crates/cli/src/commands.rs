//! One function per subcommand. Each reads the resolved configuration,
//! runs the experiment and writes its result files.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;

use serde::Serialize;
use taptrap::analysis::{
    compensate, fit_eq1, fit_linear_epsilon, scan_axial, AnalyticFamily, AxialScanOptions,
    CompensationOptions, ModelFamily, ScanResult, SolvedFamily,
};
use taptrap::constants::ELEMENTARY_CHARGE;
use taptrap::dynamics::{
    excitation_sweep, simulate, write_trajectory_csv, ForceConfig, IonState, SweepConfig,
    SweepDirection, SweepResult,
};
use taptrap::fieldsolve::cache::{read_bases, write_bases};
use taptrap::fieldsolve::generate::{blade_trap, BladeTrapOptions};
use taptrap::fieldsolve::{parse_mesh, CollocationSolver, ValidityRegion};
use taptrap::sidebands::{lamb_dicke, sideband_comb, zeeman_lines, BeamGeometry};
use taptrap::trapmodel::{
    calibrate_axis_rotation, calibrate_drive, find_equilibrium, mathieu_parameters,
    principal_axis_angle, pseudopotential, secular_frequencies, CompensationCoeffs,
};
use taptrap::{DriveConfig, IonSpecies, TrapGeometry, Vec3};

use crate::output::{Cell, OutputDir, Table};
use crate::{CliError, Command, RunConfig};

enum Backend {
    Analytic(AnalyticFamily),
    Solved(Box<SolvedFamily>),
}

macro_rules! with_family {
    ($backend:expr, $fam:ident => $body:expr) => {
        match $backend {
            Backend::Analytic($fam) => $body,
            Backend::Solved(boxed) => {
                let $fam = boxed.as_ref();
                $body
            }
        }
    };
}

struct Setup {
    ion: IonSpecies,
    drive: DriveConfig,
    backend: Backend,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn geometry(cfg: &RunConfig) -> Result<TrapGeometry, CliError> {
    let g = TrapGeometry {
        taper_angle: cfg.num("trap.taper_angle"),
        r0: cfg.num("trap.r0"),
        blade_length: cfg.num("trap.blade_length"),
        endcap_gap: cfg.num("trap.endcap_gap"),
        endcap_hole_diam: cfg.num("trap.endcap_hole_diam"),
        comp_diag_distance: cfg.num("trap.comp_diag_distance"),
        comp_diam: cfg.num("trap.comp_diam"),
    };
    g.validate().map_err(config_err)?;
    Ok(g)
}

pub fn ion(cfg: &RunConfig) -> Result<IonSpecies, CliError> {
    IonSpecies::new(cfg.num("ion.mass"), cfg.num("ion.charge"), cfg.text("ion.label")).map_err(config_err)
}

/// Drive exactly as configured, before any calibration.
pub fn raw_drive(cfg: &RunConfig) -> Result<DriveConfig, CliError> {
    let mut d = DriveConfig {
        omega_rf: TAU * cfg.num("drive.rf_freq"),
        phase_diff: cfg.num("drive.phase_diff"),
        v_d1: cfg.num("drive.v_d1"),
        v_d2: cfg.num("drive.v_d2"),
        v_comp: ["drive.v_c1", "drive.v_c2", "drive.v_c3", "drive.v_c4"].map(|k| cfg.num(k)),
        kappa_axial: cfg.num("drive.kappa_axial"),
        kappa_rf: cfg.num("drive.kappa_rf"),
        comp: CompensationCoeffs {
            beta_dipole: cfg.num("drive.beta_dipole"),
            beta_quad_xy: cfg.num("drive.beta_quad_xy"),
        },
        stray_field: ["drive.stray_field_x", "drive.stray_field_y", "drive.stray_field_z"].map(|k| cfg.num(k)),
        ..DriveConfig::default()
    };
    d.set_rf(cfg.num("drive.v_rf"), cfg.num("drive.rf_asymmetry"));
    d.validate().map_err(config_err)?;
    Ok(d)
}

fn calibrated(cfg: &RunConfig, geometry: &TrapGeometry, ion: &IonSpecies, drive: &DriveConfig) -> Result<DriveConfig, CliError> {
    let mut d = calibrate_drive(
        geometry,
        ion,
        drive,
        TAU * cfg.num("drive.target_radial"),
        TAU * cfg.num("drive.target_axial"),
    )
    .map_err(CliError::physics)?;
    if cfg.flag("calibrate.rotate_axes") {
        d = calibrate_axis_rotation(geometry, ion, &d, cfg.num("calibrate.axis_voltage"), cfg.num("calibrate.axis_angle"))
            .map_err(CliError::physics)?;
    }
    Ok(d)
}

fn backend(cfg: &RunConfig, geometry: &TrapGeometry) -> Result<Backend, CliError> {
    match cfg.text("model.backend") {
        "solved" => {
            let path = cfg.text("model.basis_file");
            if path.is_empty() {
                return Err(CliError::Config("key 'model.basis_file': required by model.backend = solved".into()));
            }
            let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open basis file {path}: {e}")))?;
            let (mesh, bases) = read_bases(&mut BufReader::new(file))
                .map_err(|e| CliError::Config(format!("cannot read basis file {path}: {e}")))?;
            let region = ValidityRegion {
                radius: cfg.num("model.region_radius"),
                half_length: cfg.num("model.region_half_length"),
            };
            Ok(Backend::Solved(Box::new(SolvedFamily { mesh, bases, region, axial_limit: geometry.blade_length / 8.0 })))
        }
        _ => Ok(Backend::Analytic(AnalyticFamily { geometry: geometry.clone() })),
    }
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let geometry = geometry(cfg)?;
    let ion = ion(cfg)?;
    let mut drive = raw_drive(cfg)?;
    let backend = backend(cfg, &geometry)?;
    if cfg.flag("drive.calibrate") {
        if matches!(backend, Backend::Solved(_)) {
            return Err(CliError::Config(
                "key 'drive.calibrate': calibration needs model.backend = analytic; set it to false".into(),
            ));
        }
        drive = calibrated(cfg, &geometry, &ion, &drive)?;
    }
    Ok(Setup { ion, drive, backend })
}

/// Laser forces from the `forces.*` keys, seeded with `seed`.
pub fn forces(cfg: &RunConfig) -> Result<ForceConfig, CliError> {
    let f = ForceConfig {
        drag_coefficient: cfg.num("forces.drag_coefficient"),
        kick_rate: cfg.num("forces.kick_rate"),
        kick_momentum: cfg.num("forces.kick_momentum"),
        mod_force_amp: cfg.num("forces.mod_force"),
        mod_freq: TAU * cfg.num("forces.mod_freq"),
        mod_direction: Vec3::from(cfg.vector("forces.mod_direction")),
        rng_seed: cfg.int("seed"),
    };
    f.validate().map_err(config_err)?;
    Ok(f)
}

fn count(cfg: &RunConfig, key: &str, min: u64) -> Result<usize, CliError> {
    let n = cfg.int(key);
    if n < min {
        return Err(CliError::Config(format!("key '{key}': must be at least {min}, got {n}")));
    }
    Ok(n as usize)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn dispatch(command: Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    match command {
        Command::PseudoMap => pseudo_map(cfg, out),
        Command::Simulate => simulate_cmd(cfg, out),
        Command::ScanAxial => scan_axial_cmd(cfg, out),
        Command::Sweep => sweep_cmd(cfg, out),
        Command::Compensate => compensate_cmd(cfg, out),
        Command::Sidebands => sidebands_cmd(cfg, out),
        Command::SolveField => solve_field_cmd(cfg, out),
        Command::Calibrate => calibrate_cmd(cfg, out),
    }
}

fn pseudo_map(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let (nx, nz) = (count(cfg, "pseudo.nx", 2)?, count(cfg, "pseudo.nz", 2)?);
    let w = cfg.num("pseudo.x_half_width");
    let xs = linspace(-w, w, nx);
    let zs = linspace(cfg.num("pseudo.z_min"), cfg.num("pseudo.z_max"), nz);
    let mut table = Table::new(&["x_m", "z_m", "phi_eff_eV", "phi_rf_eV", "phi_static_eV"])
        .meta("plane", "y = 0");
    with_family!(&s.backend, fam => {
        let model = fam.build(&s.drive).map_err(CliError::physics)?;
        for &z in &zs {
            for &x in &xs {
                let e = pseudopotential(&model, &s.ion, &Vec3::new(x, 0.0, z)).ok();
                let [tot, rf, st] = match e {
                    Some(e) => [e.total(), e.rf, e.static_].map(|v| v / ELEMENTARY_CHARGE),
                    None => [f64::NAN; 3],
                };
                table.push(vec![x.into(), z.into(), tot.into(), rf.into(), st.into()]);
            }
        }
    });
    out.write_table("pseudo_map", &table)?;
    Ok(())
}

fn simulate_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let forces = forces(cfg)?;
    let steps = count(cfg, "simulate.steps_per_rf_period", 1)?;
    let stride = count(cfg, "simulate.sample_stride", 1)?;
    let offset = Vec3::new(cfg.num("simulate.offset_x"), cfg.num("simulate.offset_y"), cfg.num("simulate.offset_z"));
    let traj = with_family!(&s.backend, fam => {
        let model = fam.build(&s.drive).map_err(CliError::physics)?;
        let eq = find_equilibrium(&model, &s.ion, &Vec3::zeros()).map_err(CliError::physics)?;
        let dt = s.drive.rf_period() / steps as f64;
        simulate(&model, &s.ion, &IonState::at_rest(eq + offset), cfg.num("simulate.duration"), dt, &forces, stride)
            .map_err(CliError::physics)?
    });
    if traj.escaped {
        eprintln!("taptrap: warning: the ion left the model domain; the trajectory is truncated");
    }
    out.write_either("trajectory", |buf| write_trajectory_csv(&traj, buf), &traj)?;
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    eq1: &'a taptrap::analysis::Eq1Fit,
    linear: &'a [taptrap::analysis::LinearFit],
    flags: &'a [String],
}

fn fit_report_text(scan: &ScanResult, report: &FitReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "# axial scan fit");
    let _ = writeln!(t, "points = {}", scan.len());
    let _ = writeln!(t, "failed_points = {}", scan.point_errors.iter().filter(|e| e.is_some()).count());
    let _ = writeln!(t, "z_start_m = {:e}", scan.values.first().copied().unwrap_or(f64::NAN));
    let _ = writeln!(t, "z_stop_m = {:e}", scan.values.last().copied().unwrap_or(f64::NAN));
    for (e, l) in report.eq1.axes.iter().zip(report.linear) {
        let _ = writeln!(t, "\n[{}]", e.label);
        let _ = writeln!(t, "eq1.nu0_Hz = {:.6e} +/- {:.2e}", e.omega0 / TAU, e.omega0_err / TAU);
        let _ = writeln!(t, "eq1.p_per_mm = {:.6} +/- {:.2e}", e.p * 1e-3, e.p_err * 1e-3);
        let _ = writeln!(t, "eq1.epsilon_per_mm = {:.6}", e.epsilon() * 1e-3);
        let _ = writeln!(t, "eq1.max_rel_residual = {:.3e}", e.max_rel_residual);
        let _ = writeln!(t, "eq1.converged = {}", e.converged);
        let _ = writeln!(t, "linear.nu0_Hz = {:.6e} +/- {:.2e}", l.intercept / TAU, l.intercept_err / TAU);
        let _ = writeln!(t, "linear.epsilon_per_mm = {:.6} +/- {:.2e}", l.epsilon * 1e-3, l.epsilon_err * 1e-3);
    }
    t
}

fn scan_axial_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let points = count(cfg, "scan.points", 3)?;
    let z = linspace(cfg.num("scan.z_start"), cfg.num("scan.z_stop"), points);
    let opts = AxialScanOptions {
        duration: cfg.num("scan.duration"),
        excitation: cfg.num("scan.excitation"),
        forces: forces(cfg)?,
        ..AxialScanOptions::default()
    };
    let omega_axial = TAU * cfg.num("scan.axial_freq");
    let scan = with_family!(&s.backend, fam => {
        scan_axial(fam, &s.ion, &s.drive, &z, omega_axial, &opts).map_err(CliError::physics)?
    });
    out.write_either("scan", |buf| scan.write_csv(buf), &scan)?;
    let eq1 = fit_eq1(&scan).map_err(CliError::physics)?;
    let linear = fit_linear_epsilon(&scan).map_err(CliError::physics)?;
    let report = FitReport { eq1: &eq1, linear: &linear, flags: &scan.flags };
    out.write_bytes("fit_report.txt", fit_report_text(&scan, &report).as_bytes())?;
    out.write_json("fit.json", &report)?;
    Ok(())
}

fn sweep_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let n = count(cfg, "sweep.points", 2)?;
    let steps = count(cfg, "sweep.steps_per_rf_period", 1)?;
    let up: Vec<f64> = linspace(cfg.num("sweep.start"), cfg.num("sweep.stop"), n).iter().map(|f| TAU * f).collect();
    if !(up[1] > up[0]) {
        return Err(CliError::Config("key 'sweep.stop': must exceed sweep.start".into()));
    }
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let template = ForceConfig {
        mod_force_amp: cfg.num("sweep.force"),
        ..forces(cfg)?
    }
    .with_damping_rate(TAU * cfg.num("sweep.damping_rate"), s.ion.mass);
    let sweep_cfg = SweepConfig {
        settle_periods: cfg.num("sweep.settle_periods"),
        measure_periods: cfg.int("sweep.measure_periods") as u32,
        dt: Some(s.drive.rf_period() / steps as f64),
    };
    let plan: Vec<(SweepDirection, &[f64])> = match cfg.text("sweep.direction") {
        "up" => vec![(SweepDirection::Up, &up)],
        "down" => vec![(SweepDirection::Down, &down)],
        _ => vec![(SweepDirection::Up, &up), (SweepDirection::Down, &down)],
    };
    let results: Vec<SweepResult> = with_family!(&s.backend, fam => {
        let model = fam.build(&s.drive).map_err(CliError::physics)?;
        let eq = find_equilibrium(&model, &s.ion, &Vec3::zeros()).map_err(CliError::physics)?;
        plan.iter()
            .map(|(dir, freqs)| {
                excitation_sweep(&model, &s.ion, &template, freqs, *dir, &IonState::at_rest(eq), &sweep_cfg)
                    .map_err(CliError::physics)
            })
            .collect::<Result<_, _>>()?
    });
    let mut table = Table::new(&["direction", "mod_freq_Hz", "amp_x_m", "amp_y_m", "amp_z_m"])
        .meta("force_N", format!("{:e}", template.mod_force_amp))
        .meta("drag_kg_per_s", format!("{:e}", template.drag_coefficient));
    for r in &results {
        let label = if r.direction == SweepDirection::Up { "up" } else { "down" };
        if r.escaped {
            table.meta.push((format!("escaped_{label}"), "true".into()));
        }
        for p in &r.points {
            let mut row: Vec<Cell> = vec![label.into(), (p.mod_freq / TAU).into()];
            row.extend(p.amplitude.iter().map(|a| Cell::Num(*a)));
            table.push(row);
        }
    }
    out.write_table("sweep", &table)?;
    Ok(())
}

fn compensate_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let box13 = (cfg.num("compensate.dv13_min"), cfg.num("compensate.dv13_max"));
    let box24 = (cfg.num("compensate.dv24_min"), cfg.num("compensate.dv24_max"));
    let opts = CompensationOptions {
        tolerance: cfg.num("compensate.tolerance"),
        rf_cycles: cfg.num("compensate.rf_cycles"),
        forces: forces(cfg)?,
        ..CompensationOptions::default()
    };
    let r = with_family!(&s.backend, fam => {
        compensate(fam, &s.ion, &s.drive, box13, box24, &opts).map_err(CliError::physics)?
    });
    let mut applied = s.drive.clone();
    applied.set_compensation(s.drive.comp_common(), r.dv13, r.dv24);
    let mut table = Table::new(&[
        "dv13_V", "dv24_V", "v_c1_V", "v_c2_V", "v_c3_V", "v_c4_V", "metric_m_per_s", "on_boundary",
        "evaluations", "converged",
    ]);
    let mut row: Vec<Cell> = vec![r.dv13.into(), r.dv24.into()];
    row.extend(applied.v_comp.iter().map(|v| Cell::Num(*v)));
    row.extend([
        r.metric.into(),
        Cell::Text(r.on_boundary.to_string()),
        Cell::Int(r.evaluations as i64),
        Cell::Text(r.converged.to_string()),
    ]);
    table.push(row);
    if r.on_boundary {
        eprintln!("taptrap: warning: the optimum lies on the search-box boundary");
    }
    out.write_table("compensation", &table)?;
    Ok(())
}

fn sidebands_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let ion = ion(cfg)?;
    let beam = BeamGeometry::new(cfg.num("sidebands.beam_angle"), cfg.num("sidebands.polarization"));
    let secular = [cfg.num("sidebands.nu_x"), cfg.num("sidebands.nu_y"), cfg.num("sidebands.nu_z")];
    let max_order = cfg.int("sidebands.max_order") as u32;
    let lines = zeeman_lines(cfg.num("sidebands.b_field"), &beam).map_err(config_err)?;
    let mut table = Table::new(&["offset_Hz", "m_g", "m_e", "n_x", "n_y", "n_z"])
        .meta("zeeman_lines", lines.len());
    for line in &lines {
        for sb in sideband_comb(line, secular, max_order).map_err(config_err)? {
            let mut row: Vec<Cell> = vec![sb.offset.into(), line.m_ground.into(), line.m_excited.into()];
            row.extend(sb.orders.iter().map(|n| Cell::Int(*n as i64)));
            table.push(row);
        }
    }
    out.write_table("sidebands", &table)?;

    let wavelength = cfg.num("sidebands.wavelength");
    let mut ld = Table::new(&["mode", "nu_Hz", "projection_deg", "eta"]);
    for (mode, nu, key) in [
        ("x", secular[0], "sidebands.radial_projection"),
        ("y", secular[1], "sidebands.radial_projection"),
        ("z", secular[2], "sidebands.axial_projection"),
    ] {
        let angle = cfg.num(key);
        let eta = lamb_dicke(TAU * nu, &ion, wavelength, angle).map_err(config_err)?;
        ld.push(vec![mode.into(), nu.into(), angle.to_degrees().into(), eta.into()]);
    }
    out.write_table("lamb_dicke", &ld)?;
    Ok(())
}

fn solve_field_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let path = cfg.text("mesh.path");
    let mesh = if path.is_empty() {
        let opts = BladeTrapOptions {
            blade_width: cfg.num("mesh.blade_width"),
            n_axial: count(cfg, "mesh.n_axial", 1)?,
            n_width: count(cfg, "mesh.n_width", 1)?,
            endcap_outer: cfg.num("mesh.endcap_outer"),
            n_ring: count(cfg, "mesh.n_ring", 1)?,
            n_theta: count(cfg, "mesh.n_theta", 3)?,
            include_compensation: cfg.flag("mesh.include_compensation"),
        };
        blade_trap(&geometry(cfg)?, &opts)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read mesh {path}: {e}")))?;
        parse_mesh(&text).map_err(|e| CliError::Config(format!("mesh {path}: {e}")))?
    };
    let solver = CollocationSolver::with_cap(&mesh, cfg.int("mesh.triangle_cap") as usize).map_err(CliError::physics)?;
    let bases = solver.solve_all().map_err(CliError::physics)?;
    let mut bin = Vec::new();
    write_bases(&mut bin, &mesh, &bases)?;
    out.write_bytes("bases.bin", &bin)?;
    let mut table = Table::new(&["electrode_id", "name", "triangles", "total_charge_C", "residual"])
        .meta("triangles", mesh.triangles.len())
        .meta("vertices", mesh.vertices.len());
    for b in &bases {
        let name = mesh.electrode_names.get(&b.electrode_id).map(String::as_str).unwrap_or("");
        let n = mesh.electrode_ids.iter().filter(|id| **id == b.electrode_id).count();
        table.push(vec![
            Cell::Int(b.electrode_id as i64),
            name.into(),
            Cell::Int(n as i64),
            b.total_charge().into(),
            b.residual.into(),
        ]);
    }
    out.write_table("solve_summary", &table)?;
    Ok(())
}

fn calibrate_cmd(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let geometry = geometry(cfg)?;
    let ion = ion(cfg)?;
    let drive = calibrated(cfg, &geometry, &ion, &raw_drive(cfg)?)?;
    let model = AnalyticFamily { geometry }.build(&drive).map_err(CliError::physics)?;
    let modes = secular_frequencies(&model, &ion, 0.0).map_err(CliError::physics)?;
    let q = mathieu_parameters(&model, &ion, 0.0).map_err(CliError::physics)?;
    let angle = principal_axis_angle(&model, &ion, 0.0).map(f64::to_degrees).unwrap_or(f64::NAN);
    let mut table = Table::new(&["quantity", "value", "unit"]);
    let rows: [(&str, f64, &str); 13] = [
        ("v_rf1", drive.v_rf1, "V"),
        ("v_rf2", drive.v_rf2, "V"),
        ("rf_asymmetry", drive.rf_asymmetry(), ""),
        ("kappa_axial", drive.kappa_axial, ""),
        ("beta_quad_xy", drive.comp.beta_quad_xy, "1/m^2"),
        ("nu_x", modes.omega_x() / TAU, "Hz"),
        ("nu_y", modes.omega_y() / TAU, "Hz"),
        ("nu_z", modes.omega_z() / TAU, "Hz"),
        ("q_x", q.q_x, ""),
        ("q_y", q.q_y, ""),
        ("a_x", q.a_x, ""),
        ("a_y", q.a_y, ""),
        ("axis_angle", angle, "deg"),
    ];
    for (name, value, unit) in rows {
        table.push(vec![name.into(), value.into(), unit.into()]);
    }
    out.write_table("calibration", &table)?;
    Ok(())
}
