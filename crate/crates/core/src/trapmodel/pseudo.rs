use nalgebra::{Matrix2, Matrix3, Vector2};

use super::{symmetric_eigen3, DomainError, FieldModel, IonSpecies, TrapError};
use crate::Vec3;

/// Finite-difference step used for Hessians of the effective potential.
pub const HESSIAN_STEP: f64 = 1e-7;

/// Effective (time-averaged) potential energy split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoEnergy {
    /// `q^2 |grad phi_rf|^2 / (4 m w^2)` (J), never negative.
    pub rf: f64,
    /// `q phi_static` (J).
    pub static_: f64,
}

impl PseudoEnergy {
    pub fn total(&self) -> f64 {
        self.rf + self.static_
    }
}

/// Pseudopotential energy at `r`.
pub fn pseudopotential<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    r: &Vec3,
) -> Result<PseudoEnergy, DomainError> {
    let s = model.sample(r)?;
    let w = model.omega_rf();
    Ok(PseudoEnergy {
        rf: ion.charge * ion.charge * s.rf_gradient_sq() / (4.0 * ion.mass * w * w),
        static_: ion.charge * s.static_potential,
    })
}

pub fn effective_energy<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    r: &Vec3,
) -> Result<f64, DomainError> {
    pseudopotential(model, ion, r).map(|e| e.total())
}

/// Central-difference gradient of the effective energy (J/m).
pub fn effective_gradient<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    r: &Vec3,
    h: f64,
) -> Result<Vec3, DomainError> {
    let mut g = Vec3::zeros();
    for i in 0..3 {
        let mut e = Vec3::zeros();
        e[i] = h;
        g[i] = (effective_energy(model, ion, &(r + e))? - effective_energy(model, ion, &(r - e))?)
            / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Hessian of the effective energy (J/m^2).
pub fn effective_hessian<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    r: &Vec3,
    h: f64,
) -> Result<Matrix3<f64>, DomainError> {
    let u = |p: Vec3| effective_energy(model, ion, &p);
    let center = u(*r)?;
    let mut hess = Matrix3::zeros();
    let unit = |i: usize| {
        let mut e = Vec3::zeros();
        e[i] = h;
        e
    };
    for i in 0..3 {
        let e = unit(i);
        hess[(i, i)] = (u(r + e)? - 2.0 * center + u(r - e)?) / (h * h);
        for j in (i + 1)..3 {
            let f = unit(j);
            let v = (u(r + e + f)? - u(r + e - f)? - u(r - e + f)? + u(r - e - f)?) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// Minimum of the effective energy in the transverse plane at fixed `z`,
/// by Newton iteration from `start`.
pub fn find_radial_minimum<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    z: f64,
    start: (f64, f64),
) -> Result<Vec3, TrapError> {
    let h = HESSIAN_STEP;
    let mut p = Vec3::new(start.0, start.1, z);
    for _ in 0..100 {
        let g = effective_gradient(model, ion, &p, h)?;
        let hess = effective_hessian(model, ion, &p, h)?;
        let h2 = Matrix2::new(hess[(0, 0)], hess[(0, 1)], hess[(1, 0)], hess[(1, 1)]);
        if !(h2[(0, 0)] > 0.0 && h2.determinant() > 0.0) {
            return Err(TrapError::Unstable(format!(
                "no transverse confinement at z = {z:.4e} m"
            )));
        }
        let step = h2
            .try_inverse()
            .ok_or_else(|| TrapError::Unstable("singular transverse Hessian".into()))?
            * Vector2::new(g.x, g.y);
        p.x -= step.x;
        p.y -= step.y;
        if step.norm() < 1e-12 {
            return Ok(p);
        }
    }
    Err(TrapError::Unstable(format!("transverse minimum search did not converge at z = {z:.4e} m")))
}

/// Full 3D minimum of the effective energy, by Newton iteration from `start`.
pub fn find_equilibrium<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    start: &Vec3,
) -> Result<Vec3, TrapError> {
    let h = HESSIAN_STEP;
    let mut p = *start;
    for _ in 0..100 {
        let g = effective_gradient(model, ion, &p, h)?;
        let hess = effective_hessian(model, ion, &p, h)?;
        let chol = hess
            .cholesky()
            .ok_or_else(|| TrapError::Unstable(format!("effective potential not confining near {p:?}")))?;
        let step = chol.solve(&g);
        p -= step;
        if step.norm() < 1e-12 {
            return Ok(p);
        }
    }
    Err(TrapError::Unstable("equilibrium search did not converge".into()))
}

/// Secular modes around the transverse effective-potential minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularModes {
    /// Location of the transverse minimum.
    pub position: Vec3,
    /// Angular frequencies ordered (x-like, y-like, z-like).
    pub omega: [f64; 3],
    /// Unit eigenvectors in the same order.
    pub axes: [Vec3; 3],
}

impl SecularModes {
    pub fn omega_x(&self) -> f64 {
        self.omega[0]
    }
    pub fn omega_y(&self) -> f64 {
        self.omega[1]
    }
    pub fn omega_z(&self) -> f64 {
        self.omega[2]
    }
}

/// Secular frequencies at axial position `z` from the Hessian of the effective
/// potential at its transverse minimum.
pub fn secular_frequencies<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    z: f64,
) -> Result<SecularModes, TrapError> {
    let position = find_radial_minimum(model, ion, z, (0.0, 0.0))?;
    let hess = effective_hessian(model, ion, &position, HESSIAN_STEP)?;
    let (vals, vecs) = symmetric_eigen3(&hess);
    if let Some(bad) = vals.iter().find(|v| !(**v > 0.0)) {
        return Err(TrapError::Unstable(format!(
            "effective-potential Hessian is not positive definite (eigenvalue {bad:.4e} J/m^2)"
        )));
    }
    // z-like: largest |e_z|; of the remaining two, x-like has the larger |e_x|
    let iz = (0..3)
        .max_by(|&a, &b| vecs[a].z.abs().total_cmp(&vecs[b].z.abs()))
        .unwrap_or(2);
    let rest: Vec<usize> = (0..3).filter(|&i| i != iz).collect();
    let (ix, iy) = if vecs[rest[0]].x.abs() >= vecs[rest[1]].x.abs() {
        (rest[0], rest[1])
    } else {
        (rest[1], rest[0])
    };
    let order = [ix, iy, iz];
    Ok(SecularModes {
        position,
        omega: order.map(|i| (vals[i] / ion.mass).sqrt()),
        axes: order.map(|i| vecs[i]),
    })
}

/// Angle of the x-like radial principal axis to the lab x axis, in
/// `(-pi/2, pi/2]`. Negative angles are clockwise looking along `+z`.
pub fn principal_axis_angle<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    z: f64,
) -> Result<f64, TrapError> {
    let modes = secular_frequencies(model, ion, z)?;
    let (wx, wy) = (modes.omega[0], modes.omega[1]);
    let splitting = (wx * wx - wy * wy).abs() / (0.5 * (wx * wx + wy * wy));
    if splitting < 1e-7 {
        return Err(TrapError::UndefinedAxes { splitting });
    }
    let e = modes.axes[0];
    let mut angle = e.y.atan2(e.x);
    let half = std::f64::consts::FRAC_PI_2;
    while angle > half {
        angle -= std::f64::consts::PI;
    }
    while angle <= -half {
        angle += std::f64::consts::PI;
    }
    Ok(angle)
}
