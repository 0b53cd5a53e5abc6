use std::f64::consts::FRAC_1_SQRT_2;

use super::{DomainError, DriveConfig, FieldModel, FieldSample, TrapError, TrapGeometry};
use crate::Vec3;

/// Closed-form near-axis field of the tapered trap.
///
/// RF part: `[V1(t) x^2 + V2(t) y^2] / rho(z)^2` with `rho(z) = r0 - z tan(theta)`.
/// Endcaps: `s (z^2 - (x^2 + y^2)/2) / (g/2)^2 + d z / g` with
/// `s = kappa (V_D1 + V_D2)/2` and `d = kappa (V_D1 - V_D2)`.
/// Compensation: a uniform field along the electrode diagonals from the
/// differential voltages plus an `xy` quadrupole from the common mode.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    geom: TrapGeometry,
    drive: DriveConfig,
    tan_taper: f64,
    // x^2 / y^2 coefficients of the cos and sin RF quadratures
    rf_cos_x: f64,
    rf_cos_y: f64,
    rf_sin_y: f64,
    dc_curv: f64,
    dc_slope: f64,
    // uniform static field (V/m) from compensation dipole and stray field,
    // stored as the gradient of the potential
    uniform_grad: Vec3,
    quad_xy: f64,
    escape_fraction: f64,
}

impl AnalyticField {
    pub fn new(geom: TrapGeometry, drive: DriveConfig) -> Result<Self, TrapError> {
        geom.validate()?;
        drive.validate()?;
        let k = drive.kappa_rf;
        let offset = drive.phase_diff - std::f64::consts::PI;
        let half_gap = 0.5 * geom.endcap_gap;
        let c = &drive.comp;
        let dv13 = drive.v_comp[0] - drive.v_comp[2];
        let dv24 = drive.v_comp[1] - drive.v_comp[3];
        // x' = (x + y)/sqrt2, y' = (y - x)/sqrt2
        let gx = c.beta_dipole * (dv13 - dv24) * FRAC_1_SQRT_2;
        let gy = c.beta_dipole * (dv13 + dv24) * FRAC_1_SQRT_2;
        let e = drive.stray_field;
        Ok(Self {
            tan_taper: geom.taper_angle.tan(),
            rf_cos_x: k * drive.v_rf1,
            rf_cos_y: -(k * drive.v_rf2) * offset.cos(),
            rf_sin_y: (k * drive.v_rf2) * offset.sin(),
            dc_curv: drive.kappa_axial * 0.5 * (drive.v_d1 + drive.v_d2) / (half_gap * half_gap),
            dc_slope: drive.kappa_axial * (drive.v_d1 - drive.v_d2) / geom.endcap_gap,
            uniform_grad: Vec3::new(gx - e[0], gy - e[1], -e[2]),
            quad_xy: c.beta_quad_xy * drive.comp_common(),
            escape_fraction: 0.9,
            geom,
            drive,
        })
    }

    pub fn geometry(&self) -> &TrapGeometry {
        &self.geom
    }

    pub fn drive(&self) -> &DriveConfig {
        &self.drive
    }

    /// Validity check shared by `sample` and the public potential op.
    fn check(&self, r: &Vec3) -> Result<f64, DomainError> {
        if !(r.x.is_finite() && r.y.is_finite() && r.z.is_finite()) {
            return Err(DomainError::NonFinite);
        }
        let rho = self.geom.check_axial(r.z)?;
        let radial = r.x.hypot(r.y);
        if radial >= rho {
            return Err(DomainError::RadialBound { r: radial, rho });
        }
        Ok(rho)
    }
}

/// Potential and gradient of `(a x^2 + b y^2) / rho^2`.
#[inline]
fn taper_quadrupole(a: f64, b: f64, r: &Vec3, inv_rho: f64, tan_taper: f64) -> (f64, Vec3) {
    let inv2 = inv_rho * inv_rho;
    let num = a * r.x * r.x + b * r.y * r.y;
    let phi = num * inv2;
    let grad = Vec3::new(
        2.0 * a * r.x * inv2,
        2.0 * b * r.y * inv2,
        2.0 * tan_taper * num * inv2 * inv_rho,
    );
    (phi, grad)
}

impl FieldModel for AnalyticField {
    fn omega_rf(&self) -> f64 {
        self.drive.omega_rf
    }

    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError> {
        let rho = self.check(r)?;
        let inv_rho = 1.0 / rho;
        let (rf_cos_potential, rf_cos_gradient) =
            taper_quadrupole(self.rf_cos_x, self.rf_cos_y, r, inv_rho, self.tan_taper);
        let (rf_sin_potential, rf_sin_gradient) =
            taper_quadrupole(0.0, self.rf_sin_y, r, inv_rho, self.tan_taper);

        let s = self.dc_curv;
        let transverse = r.x * r.x + r.y * r.y;
        let mut static_potential = s * (r.z * r.z - 0.5 * transverse) + self.dc_slope * r.z;
        let mut static_gradient = Vec3::new(-s * r.x, -s * r.y, 2.0 * s * r.z + self.dc_slope);
        static_potential += self.uniform_grad.dot(r) + self.quad_xy * r.x * r.y;
        static_gradient += self.uniform_grad + Vec3::new(self.quad_xy * r.y, self.quad_xy * r.x, 0.0);

        Ok(FieldSample {
            static_potential,
            static_gradient,
            rf_cos_potential,
            rf_cos_gradient,
            rf_sin_potential,
            rf_sin_gradient,
        })
    }

    fn contains(&self, r: &Vec3) -> bool {
        if r.z.abs() >= 0.5 * self.geom.blade_length.min(self.geom.endcap_gap) {
            return false;
        }
        let rho = self.geom.rho(r.z);
        rho > 0.0 && r.x.hypot(r.y) < self.escape_fraction * rho
    }
}
