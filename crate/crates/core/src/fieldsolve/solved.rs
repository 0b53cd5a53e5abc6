use super::{panels, ChargeBasis, Panel, SolveError, TriMesh};
use crate::constants::COULOMB;
use crate::trapmodel::{DomainError, DriveConfig, FieldModel, FieldSample};
use crate::Vec3;

/// Cylinder around the trap axis inside which a solved field is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityRegion {
    pub radius: f64,
    pub half_length: f64,
}

impl ValidityRegion {
    pub fn contains(&self, r: &Vec3) -> bool {
        r.x.hypot(r.y) < self.radius && r.z.abs() < self.half_length
    }
}

/// Voltages an electrode role receives from a drive: (static, cos, sin).
fn role_voltage(name: &str, drive: &DriveConfig) -> Option<(f64, f64, f64)> {
    let offset = drive.phase_diff - std::f64::consts::PI;
    Some(match name {
        "rf1" => (0.0, drive.v_rf1, 0.0),
        "rf2" => (0.0, -drive.v_rf2 * offset.cos(), drive.v_rf2 * offset.sin()),
        "dc1" => (drive.v_d1, 0.0, 0.0),
        "dc2" => (drive.v_d2, 0.0, 0.0),
        "c1" => (drive.v_comp[0], 0.0, 0.0),
        "c2" => (drive.v_comp[1], 0.0, 0.0),
        "c3" => (drive.v_comp[2], 0.0, 0.0),
        "c4" => (drive.v_comp[3], 0.0, 0.0),
        _ => return None,
    })
}

/// Field of a solved electrode mesh: linear superposition of unit-voltage
/// charge bases with the drive's electrode voltages, plus the drive's
/// uniform stray field.
///
/// Electrodes are bound to drive voltages by name (`rf1`, `rf2`, `dc1`,
/// `dc2`, `c1`..`c4`); any other electrode is grounded.
#[derive(Debug, Clone)]
pub struct SolvedField {
    panels: Vec<Panel>,
    q_static: Vec<f64>,
    q_cos: Vec<f64>,
    q_sin: Vec<f64>,
    omega_rf: f64,
    stray: Vec3,
    region: ValidityRegion,
}

/// Builds a [`SolvedField`] from per-electrode bases.
pub fn solved_field(
    mesh: &TriMesh,
    bases: &[ChargeBasis],
    drive: &DriveConfig,
    region: ValidityRegion,
) -> Result<SolvedField, SolveError> {
    let n = mesh.triangles.len();
    let (mut q_static, mut q_cos, mut q_sin) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for (&id, name) in &mesh.electrode_names {
        if !mesh.has_electrode(id) {
            continue;
        }
        let Some((vs, vc, vq)) = role_voltage(name, drive) else { continue };
        let driven = vs != 0.0 || vc != 0.0 || vq != 0.0;
        let basis = bases.iter().find(|b| b.electrode_id == id);
        let basis = match (basis, driven) {
            (Some(b), _) => b,
            (None, false) => continue,
            (None, true) => return Err(SolveError::MissingBasis(name.clone())),
        };
        if basis.charges.len() != n {
            return Err(SolveError::MissingBasis(format!("{name} (basis size mismatch)")));
        }
        for (k, q) in basis.charges.iter().enumerate() {
            q_static[k] += vs * q;
            q_cos[k] += vc * q;
            q_sin[k] += vq * q;
        }
    }
    Ok(SolvedField {
        panels: panels(mesh),
        q_static,
        q_cos,
        q_sin,
        omega_rf: drive.omega_rf,
        stray: Vec3::from(drive.stray_field),
        region,
    })
}

impl SolvedField {
    /// Potential of the static charge distribution alone, without the stray
    /// field; used for far-field checks.
    pub fn net_static_charge(&self) -> f64 {
        self.q_static.iter().sum()
    }

    pub fn region(&self) -> ValidityRegion {
        self.region
    }

    pub fn with_region(mut self, region: ValidityRegion) -> Self {
        self.region = region;
        self
    }
}

impl FieldModel for SolvedField {
    fn omega_rf(&self) -> f64 {
        self.omega_rf
    }

    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError> {
        if !(r.x.is_finite() && r.y.is_finite() && r.z.is_finite()) {
            return Err(DomainError::NonFinite);
        }
        if !self.region.contains(r) {
            return Err(DomainError::OutsideRegion { x: r.x, y: r.y, z: r.z });
        }
        let mut s = FieldSample::default();
        for (k, panel) in self.panels.iter().enumerate() {
            let (qs, qc, qq) = (self.q_static[k], self.q_cos[k], self.q_sin[k]);
            if qs == 0.0 && qc == 0.0 && qq == 0.0 {
                continue;
            }
            let (phi, grad) = panel.potential_and_gradient(r);
            s.static_potential += qs * phi;
            s.static_gradient += grad * qs;
            s.rf_cos_potential += qc * phi;
            s.rf_cos_gradient += grad * qc;
            s.rf_sin_potential += qq * phi;
            s.rf_sin_gradient += grad * qq;
        }
        for v in [&mut s.static_potential, &mut s.rf_cos_potential, &mut s.rf_sin_potential] {
            *v *= COULOMB;
        }
        for g in [&mut s.static_gradient, &mut s.rf_cos_gradient, &mut s.rf_sin_gradient] {
            *g *= COULOMB;
        }
        s.static_potential -= self.stray.dot(r);
        s.static_gradient -= self.stray;
        Ok(s)
    }

    fn contains(&self, r: &Vec3) -> bool {
        self.region.contains(r)
    }
}
