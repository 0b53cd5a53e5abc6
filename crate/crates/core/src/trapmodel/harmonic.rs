use super::{DomainError, FieldModel, FieldSample};
use crate::Vec3;

/// Purely static harmonic potential `sum_i curvature_i x_i^2 / 2`.
///
/// Not realizable with electrodes (it violates Laplace's equation) but useful
/// as a reference trap for integrator checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    /// Potential curvature per axis (V/m^2).
    pub curvature: [f64; 3],
    /// Nominal RF frequency; only used for time bookkeeping.
    pub omega_rf: f64,
    /// Radius of the confinement sphere.
    pub radius: f64,
}

impl HarmonicField {
    /// Field whose curvature gives secular angular frequency `omega` on every
    /// axis for a particle with charge-to-mass ratio `q_over_m`.
    pub fn isotropic(omega: f64, q_over_m: f64) -> Self {
        let k = omega * omega / q_over_m;
        Self { curvature: [k; 3], omega_rf: omega, radius: 1.0 }
    }
}

impl FieldModel for HarmonicField {
    fn omega_rf(&self) -> f64 {
        self.omega_rf
    }

    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError> {
        if !self.contains(r) {
            return Err(DomainError::OutsideRegion { x: r.x, y: r.y, z: r.z });
        }
        let k = self.curvature;
        Ok(FieldSample {
            static_potential: 0.5 * (k[0] * r.x * r.x + k[1] * r.y * r.y + k[2] * r.z * r.z),
            static_gradient: Vec3::new(k[0] * r.x, k[1] * r.y, k[2] * r.z),
            ..FieldSample::default()
        })
    }

    fn contains(&self, r: &Vec3) -> bool {
        r.norm() < self.radius
    }
}
