use super::{FieldModel, IonSpecies, TrapError};
use crate::Vec3;

/// Dimensionless Mathieu parameters of the two radial axes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MathieuParams {
    /// RF parameters (magnitudes).
    pub q_x: f64,
    pub q_y: f64,
    /// Static parameters (signed).
    pub a_x: f64,
    pub a_y: f64,
    /// Both axes inside the lowest stability region.
    pub stable: bool,
}

/// Lowest stability region of the Mathieu equation `x'' + (a - 2q cos 2t) x = 0`
/// using the small-q expansions of the characteristic curves `a0(q)` and
/// `b1(q)`.
pub fn first_region_stable(a: f64, q: f64) -> bool {
    let q = q.abs();
    if q >= 0.908 {
        return false;
    }
    let q2 = q * q;
    let lower = -0.5 * q2 + 7.0 * q2 * q2 / 128.0;
    let upper = 1.0 - q - q2 / 8.0 + q2 * q / 64.0 - q2 * q2 / 1536.0;
    a > lower && a < upper
}

/// Mathieu parameters on the trap axis at `z`, from the curvatures of the RF
/// amplitude and static potentials:
/// `q = 2 |Q| d2phi_rf / (m w^2)`, `a = 4 Q d2phi_s / (m w^2)`.
pub fn mathieu_parameters<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    z: f64,
) -> Result<MathieuParams, TrapError> {
    let h = 1e-6;
    let center = model.sample(&Vec3::new(0.0, 0.0, z))?;
    let mut curv = [[0.0; 3]; 2]; // [axis][cos, sin, static]
    for (axis, slot) in curv.iter_mut().enumerate() {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let p = model.sample(&(Vec3::new(0.0, 0.0, z) + e))?;
        let m = model.sample(&(Vec3::new(0.0, 0.0, z) - e))?;
        let d2 = |f: fn(&super::FieldSample) -> f64| (f(&p) - 2.0 * f(&center) + f(&m)) / (h * h);
        *slot = [
            d2(|s| s.rf_cos_potential),
            d2(|s| s.rf_sin_potential),
            d2(|s| s.static_potential),
        ];
    }
    let w2 = model.omega_rf().powi(2);
    let scale = ion.charge / (ion.mass * w2);
    let q = |c: [f64; 3]| 2.0 * scale.abs() * c[0].hypot(c[1]);
    let a = |c: [f64; 3]| 4.0 * scale * c[2];
    let (q_x, q_y, a_x, a_y) = (q(curv[0]), q(curv[1]), a(curv[0]), a(curv[1]));
    Ok(MathieuParams {
        q_x,
        q_y,
        a_x,
        a_y,
        stable: first_region_stable(a_x, q_x) && first_region_stable(a_y, q_y),
    })
}
