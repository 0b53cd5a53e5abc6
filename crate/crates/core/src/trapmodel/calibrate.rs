use super::{
    mathieu_parameters, principal_axis_angle, secular_frequencies, AnalyticField, DriveConfig,
    IonSpecies, TrapError, TrapGeometry,
};

const MAX_ITER: usize = 60;
const TOL: f64 = 1e-11;

/// Scales the RF amplitudes (keeping their ratio and phase) and the endcap
/// efficiency `kappa_axial` so that the x-like and axial secular frequencies
/// at `z = 0` hit the targets.
pub fn calibrate_drive(
    geom: &TrapGeometry,
    ion: &IonSpecies,
    base: &DriveConfig,
    target_radial: f64,
    target_axial: f64,
) -> Result<DriveConfig, TrapError> {
    if !(target_radial > 0.0 && target_axial > 0.0) {
        return Err(TrapError::Calibration("targets must be positive".into()));
    }
    let endcap_sum = base.v_d1 + base.v_d2;
    if !(ion.charge * endcap_sum * base.kappa_axial > 0.0) {
        return Err(TrapError::Calibration(
            "endcap voltages and kappa_axial cannot confine this charge axially".into(),
        ));
    }
    if base.v_rf_mean() == 0.0 {
        return Err(TrapError::Calibration("RF amplitude is zero".into()));
    }
    let mut drive = base.clone();
    for _ in 0..MAX_ITER {
        let model = AnalyticField::new(geom.clone(), drive.clone())?;
        let modes = secular_frequencies(&model, ion, 0.0).map_err(|e| {
            TrapError::Calibration(format!("secular frequencies unavailable during calibration: {e}"))
        })?;
        let rr = target_radial / modes.omega_x();
        let ra = target_axial / modes.omega_z();
        if (rr - 1.0).abs() < TOL && (ra - 1.0).abs() < TOL {
            let params = mathieu_parameters(&model, ion, 0.0)?;
            if !params.stable {
                return Err(TrapError::Calibration(format!(
                    "calibrated point outside the first stability region (q_x = {:.4}, q_y = {:.4}, a = {:.4e}; need q < 0.908)",
                    params.q_x, params.q_y, params.a_x
                )));
            }
            return Ok(drive);
        }
        // omega_x^2 + omega_z^2/2 scales as V^2 and omega_z^2 as kappa
        let wz_new = target_axial;
        let radial_sq_now = modes.omega_x().powi(2) + 0.5 * modes.omega_z().powi(2);
        let radial_sq_target = target_radial.powi(2) + 0.5 * wz_new.powi(2);
        let rf_scale = (radial_sq_target / radial_sq_now).sqrt();
        drive.v_rf1 *= rf_scale;
        drive.v_rf2 *= rf_scale;
        drive.kappa_axial *= ra * ra;
        let q = mathieu_parameters(&AnalyticField::new(geom.clone(), drive.clone())?, ion, 0.0)?;
        if q.q_x.max(q.q_y) >= 0.908 {
            return Err(TrapError::Calibration(format!(
                "target requires q = {:.3}, beyond the stability bound q < 0.908",
                q.q_x.max(q.q_y)
            )));
        }
    }
    Err(TrapError::Calibration("drive calibration did not converge".into()))
}

/// Chooses `beta_quad_xy` so that with common-mode compensation voltage
/// `v_common` the x-like principal axis sits at `target_angle` (rad) from the
/// lab x axis. The returned drive has the compensation electrodes set to that
/// common mode.
pub fn calibrate_axis_rotation(
    geom: &TrapGeometry,
    ion: &IonSpecies,
    base: &DriveConfig,
    v_common: f64,
    target_angle: f64,
) -> Result<DriveConfig, TrapError> {
    if v_common == 0.0 {
        return Err(TrapError::Calibration("common-mode voltage must be non-zero".into()));
    }
    if !(target_angle.abs() < std::f64::consts::FRAC_PI_4) {
        return Err(TrapError::Calibration(
            "a finite cross term rotates the axes by less than 45 degrees".into(),
        ));
    }
    let mut drive = base.clone();
    drive.comp.beta_quad_xy = 0.0;
    let (_, d13, d24) = (drive.comp_common(), drive.comp_differential().0, drive.comp_differential().1);
    drive.set_compensation(0.0, d13, d24);
    let model = AnalyticField::new(geom.clone(), drive.clone())?;
    let modes = secular_frequencies(&model, ion, 0.0)?;
    // stiffness difference along the unrotated axes
    let kxx = ion.mass * modes.omega_x().powi(2);
    let kyy = ion.mass * modes.omega_y().powi(2);
    let kxy = 0.5 * (2.0 * target_angle).tan() * (kxx - kyy);
    drive.comp.beta_quad_xy = kxy / (ion.charge * v_common);
    drive.set_compensation(v_common, d13, d24);
    let check = principal_axis_angle(&AnalyticField::new(geom.clone(), drive.clone())?, ion, 0.0)?;
    if (check - target_angle).abs() > 1e-6 {
        return Err(TrapError::Calibration(format!(
            "axis calibration missed its target: {check:.6} rad vs {target_angle:.6} rad"
        )));
    }
    Ok(drive)
}
