use super::DynamicsError;
use crate::Vec3;

/// Non-electric forces acting on the ion.
///
/// The modulated force is `mod_force_amp (1 + sin(phase)) / 2` along
/// `mod_direction`, with `phase` advancing at `mod_freq`; drag is `-drag v`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ForceConfig {
    /// Linear drag coefficient (kg/s).
    pub drag_coefficient: f64,
    /// Mean number of recoil kicks per second.
    pub kick_rate: f64,
    /// Momentum of one kick (kg m/s), in a random direction.
    pub kick_momentum: f64,
    /// Peak modulated force (N).
    pub mod_force_amp: f64,
    /// Modulation angular frequency (rad/s).
    pub mod_freq: f64,
    pub mod_direction: Vec3,
    pub rng_seed: u64,
}

impl Default for ForceConfig {
    fn default() -> Self {
        Self {
            drag_coefficient: 0.0,
            kick_rate: 0.0,
            kick_momentum: 0.0,
            mod_force_amp: 0.0,
            mod_freq: 0.0,
            mod_direction: Vec3::x(),
            rng_seed: 0,
        }
    }
}

impl ForceConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.drag_coefficient >= 0.0) {
            return Err(DynamicsError::InvalidParameter("drag coefficient must be >= 0".into()));
        }
        if !(self.kick_rate >= 0.0) || !self.kick_momentum.is_finite() {
            return Err(DynamicsError::InvalidParameter("kick rate must be >= 0".into()));
        }
        if !((self.mod_direction.norm() - 1.0).abs() < 1e-9) {
            return Err(DynamicsError::InvalidParameter(
                "modulation direction must be a unit vector".into(),
            ));
        }
        if !(self.mod_force_amp.is_finite() && self.mod_freq.is_finite()) {
            return Err(DynamicsError::InvalidParameter("non-finite modulation".into()));
        }
        Ok(())
    }

    /// Sets the drag from a damping rate `gamma / m` (1/s).
    pub fn with_damping_rate(mut self, rate: f64, mass: f64) -> Self {
        self.drag_coefficient = rate * mass;
        self
    }

    pub fn modulated_force(&self, phase: f64) -> Vec3 {
        if self.mod_force_amp == 0.0 {
            return Vec3::zeros();
        }
        self.mod_direction * (0.5 * self.mod_force_amp * (1.0 + phase.sin()))
    }
}
