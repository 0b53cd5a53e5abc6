use thiserror::Error;

use crate::Vec3;

/// Position outside the region where a field model is defined.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("axial bound violated: |z| = {:.4e} m must be below {limit:.4e} m", z.abs())]
    AxialBound { z: f64, limit: f64 },
    #[error("taper pole: local blade distance rho({z:.4e} m) = {rho:.4e} m is not positive")]
    TaperPole { z: f64, rho: f64 },
    #[error("radial bound violated: r = {r:.4e} m reaches the blade distance {rho:.4e} m")]
    RadialBound { r: f64, rho: f64 },
    #[error("position ({x:.4e}, {y:.4e}, {z:.4e}) m lies outside the model region")]
    OutsideRegion { x: f64, y: f64, z: f64 },
    #[error("non-finite position")]
    NonFinite,
}

/// Potential and gradient at one point, split into the static part and the
/// two RF quadratures: `phi(r, t) = phi_s + cos(wt) phi_c + sin(wt) phi_q`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub static_potential: f64,
    pub static_gradient: Vec3,
    pub rf_cos_potential: f64,
    pub rf_cos_gradient: Vec3,
    pub rf_sin_potential: f64,
    pub rf_sin_gradient: Vec3,
}

impl FieldSample {
    pub fn potential_at(&self, phase: f64) -> f64 {
        let (s, c) = phase.sin_cos();
        self.static_potential + c * self.rf_cos_potential + s * self.rf_sin_potential
    }

    pub fn gradient_at(&self, phase: f64) -> Vec3 {
        let (s, c) = phase.sin_cos();
        self.static_gradient + self.rf_cos_gradient * c + self.rf_sin_gradient * s
    }

    /// Time average of |grad phi_rf|^2 times two, i.e. the squared amplitude
    /// summed over both quadratures.
    pub fn rf_gradient_sq(&self) -> f64 {
        self.rf_cos_gradient.norm_squared() + self.rf_sin_gradient.norm_squared()
    }
}

/// An evaluatable electric potential `phi(r, t)` that is periodic in time
/// with period `2 pi / omega_rf`.
///
/// Implementations are immutable and may be shared between threads.
pub trait FieldModel: Send + Sync {
    fn omega_rf(&self) -> f64;

    /// Static and RF parts of potential and gradient at `r`.
    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError>;

    /// Whether `r` lies inside the confinement region; leaving it counts as an
    /// escape during propagation.
    fn contains(&self, r: &Vec3) -> bool;

    fn potential(&self, r: &Vec3, t: f64) -> Result<f64, DomainError> {
        Ok(self.sample(r)?.potential_at(self.omega_rf() * t))
    }

    fn gradient(&self, r: &Vec3, t: f64) -> Result<Vec3, DomainError> {
        Ok(self.sample(r)?.gradient_at(self.omega_rf() * t))
    }

    fn static_potential(&self, r: &Vec3) -> Result<f64, DomainError> {
        Ok(self.sample(r)?.static_potential)
    }
}

impl<M: FieldModel + ?Sized> FieldModel for &M {
    fn omega_rf(&self) -> f64 {
        (**self).omega_rf()
    }
    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError> {
        (**self).sample(r)
    }
    fn contains(&self, r: &Vec3) -> bool {
        (**self).contains(r)
    }
}

impl<M: FieldModel + ?Sized> FieldModel for Box<M> {
    fn omega_rf(&self) -> f64 {
        (**self).omega_rf()
    }
    fn sample(&self, r: &Vec3) -> Result<FieldSample, DomainError> {
        (**self).sample(r)
    }
    fn contains(&self, r: &Vec3) -> bool {
        (**self).contains(r)
    }
}
