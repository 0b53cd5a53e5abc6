use crate::Vec3;

/// Position, velocity and time of the ion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IonState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub time: f64,
}

impl IonState {
    pub fn new(position: Vec3, velocity: Vec3, time: f64) -> Self {
        Self { position, velocity, time }
    }

    pub fn at_rest(position: Vec3) -> Self {
        Self::new(position, Vec3::zeros(), 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|v| v.is_finite()) && self.time.is_finite()
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        0.5 * mass * self.velocity.norm_squared()
    }
}
