use std::f64::consts::FRAC_PI_4;

use super::{DomainError, TrapError};

/// Static electrode dimensions of the tapered trap.
///
/// The RF blade edges sit at distance `rho(z) = r0 - z tan(taper_angle)` from
/// the trap axis, so a positive taper narrows the trap towards `+z`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrapGeometry {
    /// Blade inclination to the trap axis (rad).
    pub taper_angle: f64,
    /// Blade-edge to axis distance at z = 0 (m).
    pub r0: f64,
    pub blade_length: f64,
    pub endcap_gap: f64,
    pub endcap_hole_diam: f64,
    /// Diagonal distance between opposite compensation electrodes.
    pub comp_diag_distance: f64,
    pub comp_diam: f64,
}

impl Default for TrapGeometry {
    fn default() -> Self {
        Self {
            taper_angle: 10f64.to_radians(),
            r0: 0.6389e-3,
            blade_length: 4.0e-3,
            endcap_gap: 4.8e-3,
            endcap_hole_diam: 0.8e-3,
            comp_diag_distance: 17.0e-3,
            comp_diam: 2.0e-3,
        }
    }
}

impl TrapGeometry {
    pub fn validate(&self) -> Result<(), TrapError> {
        // Negative angles describe the mirrored trap (narrowing towards -z).
        if !(self.taper_angle.abs() < FRAC_PI_4) {
            return Err(TrapError::InvalidParameter(format!(
                "taper angle must satisfy |angle| < pi/4, got {}",
                self.taper_angle
            )));
        }
        let lengths = [
            ("r0", self.r0),
            ("blade_length", self.blade_length),
            ("endcap_gap", self.endcap_gap),
            ("endcap_hole_diam", self.endcap_hole_diam),
            ("comp_diag_distance", self.comp_diag_distance),
            ("comp_diam", self.comp_diam),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrapError::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Local blade-edge distance at axial position `z`.
    pub fn rho(&self, z: f64) -> f64 {
        self.r0 - z * self.taper_angle.tan()
    }

    /// Shape parameter `tan(taper)/r0`, the only combination identifiable from
    /// radial frequencies.
    pub fn pitch(&self) -> f64 {
        self.taper_angle.tan() / self.r0
    }

    /// Checks that `z` lies inside the region where the near-axis field form
    /// is valid.
    pub fn check_axial(&self, z: f64) -> Result<f64, DomainError> {
        let limit = 0.5 * self.blade_length;
        if !(z.abs() < limit) {
            return Err(DomainError::AxialBound { z, limit });
        }
        let rho = self.rho(z);
        if !(rho > 0.0) {
            return Err(DomainError::TaperPole { z, rho });
        }
        Ok(rho)
    }
}
