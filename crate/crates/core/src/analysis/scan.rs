use std::io::{self, Write};

use rayon::prelude::*;

use super::{peak_frequency, power_spectrum_along, AnalysisError};
use crate::dynamics::{simulate, ForceConfig, IonState, SweepResult};
use crate::fieldsolve::{solved_field, ChargeBasis, SolvedField, TriMesh, ValidityRegion};
use crate::trapmodel::{
    find_equilibrium, secular_frequencies, AnalyticField, DriveConfig, FieldModel, IonSpecies,
    SecularModes, TrapGeometry,
};
use crate::Vec3;

/// A field backend that can be rebuilt for any drive configuration.
pub trait ModelFamily: Sync {
    type Model: FieldModel;

    fn build(&self, drive: &DriveConfig) -> Result<Self::Model, AnalysisError>;

    /// Largest |z| an axial scan may target.
    fn axial_scan_limit(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFamily {
    pub geometry: TrapGeometry,
}

impl ModelFamily for AnalyticFamily {
    type Model = AnalyticField;

    fn build(&self, drive: &DriveConfig) -> Result<AnalyticField, AnalysisError> {
        Ok(AnalyticField::new(self.geometry.clone(), drive.clone())?)
    }

    fn axial_scan_limit(&self) -> f64 {
        self.geometry.blade_length / 8.0
    }
}

/// Solved electrode mesh with precomputed unit-voltage bases.
#[derive(Debug, Clone)]
pub struct SolvedFamily {
    pub mesh: TriMesh,
    pub bases: Vec<ChargeBasis>,
    pub region: ValidityRegion,
    pub axial_limit: f64,
}

impl ModelFamily for SolvedFamily {
    type Model = SolvedField;

    fn build(&self, drive: &DriveConfig) -> Result<SolvedField, AnalysisError> {
        solved_field(&self.mesh, &self.bases, drive, self.region)
            .map_err(|e| AnalysisError::Backend(e.to_string()))
    }

    fn axial_scan_limit(&self) -> f64 {
        self.axial_limit
    }
}

/// A column of per-point measurements.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanColumn {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

impl ScanColumn {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, len: usize) -> Self {
        Self { name: name.into(), unit: unit.into(), values: vec![f64::NAN; len], uncertainty: vec![0.0; len] }
    }
}

/// Measurements as a function of one scanned parameter.
///
/// `measured` columns are what fits operate on; `auxiliary` columns carry
/// supporting quantities such as model predictions or applied voltages.
/// Failed points hold NaN and an entry in `point_errors`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanResult {
    pub parameter: String,
    pub parameter_unit: String,
    pub values: Vec<f64>,
    pub measured: Vec<ScanColumn>,
    pub auxiliary: Vec<ScanColumn>,
    pub point_errors: Vec<Option<String>>,
    pub flags: Vec<String>,
}

impl ScanResult {
    pub fn new(parameter: impl Into<String>, unit: impl Into<String>, values: Vec<f64>) -> Self {
        let n = values.len();
        Self {
            parameter: parameter.into(),
            parameter_unit: unit.into(),
            values,
            measured: Vec::new(),
            auxiliary: Vec::new(),
            point_errors: vec![None; n],
            flags: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&ScanColumn> {
        self.measured.iter().chain(&self.auxiliary).find(|c| c.name == name)
    }

    /// Sweep amplitudes per lab axis against modulation frequency (Hz).
    pub fn from_sweep(sweep: &SweepResult) -> Self {
        let freqs: Vec<f64> = sweep.points.iter().map(|p| p.mod_freq / std::f64::consts::TAU).collect();
        let n = freqs.len();
        let mut result = Self::new("mod_freq", "Hz", freqs);
        for (k, name) in ["amp_x", "amp_y", "amp_z"].into_iter().enumerate() {
            let mut c = ScanColumn::new(name, "m", n);
            c.values = sweep.points.iter().map(|p| p.amplitude[k]).collect();
            result.measured.push(c);
        }
        result.flags.push(format!("direction={}", if sweep.direction == crate::dynamics::SweepDirection::Up { "up" } else { "down" }));
        if sweep.escaped {
            result.flags.push("escaped".into());
        }
        result
    }

    /// Checks equal column lengths and non-negative uncertainties.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let n = self.values.len();
        for c in self.measured.iter().chain(&self.auxiliary) {
            if c.values.len() != n || c.uncertainty.len() != n {
                return Err(AnalysisError::InvalidParameter(format!("column {} has the wrong length", c.name)));
            }
            if c.uncertainty.iter().any(|u| *u < 0.0) {
                return Err(AnalysisError::InvalidParameter(format!("column {} has negative uncertainty", c.name)));
            }
        }
        if self.point_errors.len() != n {
            return Err(AnalysisError::InvalidParameter("point error list has the wrong length".into()));
        }
        Ok(())
    }

    /// CSV with header `<parameter>_<unit>`, then `<name>_<unit>,<name>_err`
    /// per measured and auxiliary column, and a final `error` column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for f in &self.flags {
            writeln!(out, "# flag = {f}")?;
        }
        let cols: Vec<&ScanColumn> = self.measured.iter().chain(&self.auxiliary).collect();
        let mut header = vec![format!("{}_{}", self.parameter, self.parameter_unit)];
        for c in &cols {
            header.push(format!("{}_{}", c.name, c.unit));
            header.push(format!("{}_err", c.name));
        }
        header.push("error".into());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.values.len() {
            let mut row = vec![format!("{:e}", self.values[i])];
            for c in &cols {
                row.push(format!("{:e}", c.values[i]));
                row.push(format!("{:e}", c.uncertainty[i]));
            }
            row.push(self.point_errors[i].as_deref().unwrap_or("").replace([',', '\n'], ";"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Settings of the trajectory-based frequency measurement in [`scan_axial`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxialScanOptions {
    /// Simulated time per point (s).
    pub duration: f64,
    /// Steps per RF period.
    pub steps_per_rf_period: usize,
    /// Steps between stored samples.
    pub sample_stride: usize,
    /// Initial radial displacement along each mode axis (m).
    pub excitation: f64,
    /// Half-width of the peak search band relative to the predicted
    /// frequency.
    pub band_fraction: f64,
    /// Laser forces during the measurement; the seed is combined with the
    /// point index.
    pub forces: ForceConfig,
}

impl Default for AxialScanOptions {
    fn default() -> Self {
        Self {
            duration: 1e-3,
            steps_per_rf_period: 200,
            sample_stride: 25,
            excitation: 1e-6,
            band_fraction: 0.1,
            forces: ForceConfig::default(),
        }
    }
}

const ENDCAP_MAX_ITER: usize = 40;

/// Sets the endcap voltages so the effective-potential minimum sits at
/// `z_target` with axial secular frequency `omega_axial`.
///
/// Newton iteration on (sum, difference) of the endcap voltages with a
/// finite-difference Jacobian.
pub fn position_endcaps<F: ModelFamily + ?Sized>(
    family: &F,
    ion: &IonSpecies,
    base: &DriveConfig,
    z_target: f64,
    omega_axial: f64,
) -> Result<(DriveConfig, SecularModes), AnalysisError> {
    if !(omega_axial > 0.0) {
        return Err(AnalysisError::InvalidParameter("axial frequency must be > 0".into()));
    }
    let eval = |sum: f64, diff: f64| -> Result<(DriveConfig, SecularModes, [f64; 2]), AnalysisError> {
        let mut drive = base.clone();
        drive.set_endcaps(sum, diff);
        let model = family.build(&drive)?;
        let eq = find_equilibrium(&model, ion, &Vec3::new(0.0, 0.0, z_target))?;
        let modes = secular_frequencies(&model, ion, eq.z)?;
        let r = [(eq.z - z_target) * omega_axial, modes.omega_z() - omega_axial];
        Ok((drive, modes, r))
    };
    let mut sum = base.v_d1 + base.v_d2;
    let mut diff = base.v_d1 - base.v_d2;
    if sum == 0.0 {
        return Err(AnalysisError::InvalidParameter("endcap sum voltage is zero".into()));
    }
    let (_, first, _) = eval(sum, diff)?;
    // the axial curvature is close to proportional to the endcap voltages
    let scale = (omega_axial / first.omega_z()).powi(2);
    sum *= scale;
    diff *= scale;
    let mut reached = first.position.z;
    for _ in 0..ENDCAP_MAX_ITER {
        let (drive, modes, r) = eval(sum, diff)?;
        reached = modes.position.z;
        let z_err = (modes.position.z - z_target).abs();
        if z_err < 1e-12 && (modes.omega_z() / omega_axial - 1.0).abs() < 1e-10 {
            return Ok((drive, modes));
        }
        let hs = 1e-6 * sum.abs();
        let hd = 1e-6 * sum.abs().max(diff.abs());
        let (_, _, rs) = eval(sum + hs, diff)?;
        let (_, _, rd) = eval(sum, diff + hd)?;
        let j = nalgebra::Matrix2::new(
            (rs[0] - r[0]) / hs,
            (rd[0] - r[0]) / hd,
            (rs[1] - r[1]) / hs,
            (rd[1] - r[1]) / hd,
        );
        let step = j
            .lu()
            .solve(&nalgebra::Vector2::new(r[0], r[1]))
            .ok_or_else(|| AnalysisError::Degenerate("endcap Jacobian is singular".into()))?;
        sum -= step[0];
        diff -= step[1];
    }
    Err(AnalysisError::Degenerate(format!(
        "endcap solve for z = {z_target:.4e} m did not converge (reached z = {reached:.4e} m)"
    )))
}

fn point_seed(seed: u64, index: usize) -> u64 {
    let mut x = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Radial secular frequencies against axial ion position.
///
/// For every target the endcaps are re-solved to place the ion at `z` with
/// axial frequency `omega_axial`, the ion is released from a small radial
/// displacement in the full RF field, and each radial frequency is read from
/// the spectrum of the motion projected on its mode axis. Mode labels follow
/// eigenvector overlap with the previous point rather than frequency order.
///
/// Measured columns `nu_x`, `nu_y` (Hz); auxiliary columns hold the
/// effective-potential predictions and the endcap voltages.
pub fn scan_axial<F: ModelFamily>(
    family: &F,
    ion: &IonSpecies,
    base: &DriveConfig,
    z_targets: &[f64],
    omega_axial: f64,
    options: &AxialScanOptions,
) -> Result<ScanResult, AnalysisError> {
    let limit = family.axial_scan_limit();
    if let Some(z) = z_targets.iter().find(|z| !(z.abs() <= limit)) {
        return Err(AnalysisError::InvalidParameter(format!(
            "target z = {z:.4e} m outside the scan range |z| <= {limit:.4e} m"
        )));
    }
    if options.steps_per_rf_period < crate::dynamics::MIN_STEPS_PER_RF_PERIOD || options.sample_stride == 0 {
        return Err(AnalysisError::InvalidParameter("invalid time stepping".into()));
    }

    let solved: Vec<Result<(DriveConfig, SecularModes), AnalysisError>> = z_targets
        .par_iter()
        .map(|&z| position_endcaps(family, ion, base, z, omega_axial))
        .collect();

    // Mode labelling by eigenvector continuity.
    let mut axes: Vec<Option<[Vec3; 2]>> = Vec::with_capacity(z_targets.len());
    let mut previous: Option<[Vec3; 2]> = None;
    for s in &solved {
        let Ok((_, modes)) = s else {
            axes.push(None);
            continue;
        };
        let mut pair = [modes.axes[0], modes.axes[1]];
        if let Some(prev) = previous {
            let keep = prev[0].dot(&pair[0]).abs() + prev[1].dot(&pair[1]).abs();
            let swap = prev[0].dot(&pair[1]).abs() + prev[1].dot(&pair[0]).abs();
            if swap > keep {
                pair.swap(0, 1);
            }
        }
        previous = Some(pair);
        axes.push(Some(pair));
    }

    let measured: Vec<Result<[(f64, f64, f64); 2], AnalysisError>> = solved
        .par_iter()
        .zip(axes.par_iter())
        .enumerate()
        .map(|(i, (s, pair))| {
            let (drive, modes) = s.as_ref().map_err(Clone::clone)?;
            let pair = pair.expect("labelled axes exist for solved points");
            let model = family.build(drive)?;
            let dt = drive.rf_period() / options.steps_per_rf_period as f64;
            let start = modes.position + (pair[0] + pair[1]) * options.excitation;
            let forces = ForceConfig { rng_seed: point_seed(options.forces.rng_seed, i), ..options.forces.clone() };
            let traj = simulate(&model, ion, &IonState::at_rest(start), options.duration, dt, &forces, options.sample_stride)?;
            if traj.escaped {
                return Err(AnalysisError::Escaped(format!("during the measurement at z = {:.4e} m", modes.position.z)));
            }
            let mut out = [(0.0, 0.0, 0.0); 2];
            for (m, axis) in pair.iter().enumerate() {
                let predicted = omega_for_axis(modes, axis) / std::f64::consts::TAU;
                let spec = power_spectrum_along(&traj, axis)?;
                let band = (predicted * (1.0 - options.band_fraction), predicted * (1.0 + options.band_fraction));
                let pk = peak_frequency(&spec, band)?;
                out[m] = (pk.frequency, pk.uncertainty, predicted);
            }
            Ok(out)
        })
        .collect();

    let n = z_targets.len();
    let mut result = ScanResult::new("z", "m", vec![f64::NAN; n]);
    let mut nu = [ScanColumn::new("nu_x", "Hz", n), ScanColumn::new("nu_y", "Hz", n)];
    let mut pseudo = [ScanColumn::new("nu_x_pseudo", "Hz", n), ScanColumn::new("nu_y_pseudo", "Hz", n)];
    let mut nu_z = ScanColumn::new("nu_z_pseudo", "Hz", n);
    let mut vd1 = ScanColumn::new("v_d1", "V", n);
    let mut vd2 = ScanColumn::new("v_d2", "V", n);
    for i in 0..n {
        result.values[i] = z_targets[i];
        if let Ok((drive, modes)) = &solved[i] {
            result.values[i] = modes.position.z;
            nu_z.values[i] = modes.omega_z() / std::f64::consts::TAU;
            vd1.values[i] = drive.v_d1;
            vd2.values[i] = drive.v_d2;
        }
        match &measured[i] {
            Ok(m) => {
                for k in 0..2 {
                    nu[k].values[i] = m[k].0;
                    nu[k].uncertainty[i] = m[k].1;
                    pseudo[k].values[i] = m[k].2;
                }
            }
            Err(e) => result.point_errors[i] = Some(e.to_string()),
        }
    }
    let [nx, ny] = nu;
    let [px, py] = pseudo;
    result.measured = vec![nx, ny];
    result.auxiliary = vec![px, py, nu_z, vd1, vd2];
    if result.point_errors.iter().any(Option::is_some) {
        result.flags.push("partial".into());
    }
    Ok(result)
}

fn omega_for_axis(modes: &SecularModes, axis: &Vec3) -> f64 {
    (0..3)
        .max_by(|&a, &b| modes.axes[a].dot(axis).abs().total_cmp(&modes.axes[b].dot(axis).abs()))
        .map(|i| modes.omega[i])
        .unwrap_or(f64::NAN)
}
