use std::f64::consts::PI;

use super::TrapError;

/// Geometric efficiency coefficients of the four compensation electrodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompensationCoeffs {
    /// Uniform field per volt of differential voltage between opposite
    /// electrodes (1/m).
    pub beta_dipole: f64,
    /// `xy` quadrupole curvature per volt of common-mode voltage (1/m^2).
    pub beta_quad_xy: f64,
}

/// Electrode voltages and RF drive.
///
/// Blade pair 1 (along x) carries `v_rf1 cos(wt)`, pair 2 (along y) carries
/// `-v_rf2 cos(wt + phase_diff - pi)`. Endcap D1 sits at `+z`, D2 at `-z`.
/// Compensation electrodes C1..C4 sit on the diagonals at 45, 135, 225 and
/// 315 degrees from the x axis.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriveConfig {
    /// Angular RF frequency (rad/s).
    pub omega_rf: f64,
    pub v_rf1: f64,
    pub v_rf2: f64,
    /// Phase between the two blade pairs (rad); pi for a symmetric drive.
    pub phase_diff: f64,
    pub v_d1: f64,
    pub v_d2: f64,
    pub v_comp: [f64; 4],
    /// Efficiency of the endcaps in producing axial curvature.
    pub kappa_axial: f64,
    /// Efficiency of the blades relative to ideal hyperbolic electrodes.
    pub kappa_rf: f64,
    pub comp: CompensationCoeffs,
    /// Uniform stray electric field (V/m) acting on the ion.
    pub stray_field: [f64; 3],
}

impl Default for DriveConfig {
    fn default() -> Self {
        let mut d = Self {
            omega_rf: 2.0 * PI * 11.17e6,
            v_rf1: 95.0,
            v_rf2: 95.0,
            phase_diff: PI,
            v_d1: 10.0,
            v_d2: 10.0,
            v_comp: [0.0; 4],
            kappa_axial: 0.05,
            kappa_rf: 1.0,
            comp: CompensationCoeffs { beta_dipole: 1.0, beta_quad_xy: 0.0 },
            stray_field: [0.0; 3],
        };
        d.set_rf(95.0, 0.007);
        d
    }
}

impl DriveConfig {
    /// Symmetric drive: equal amplitudes, opposite phase, no DC offsets
    /// except the endcaps.
    pub fn symmetric(omega_rf: f64, v_rf: f64) -> Self {
        Self {
            omega_rf,
            v_rf1: v_rf,
            v_rf2: v_rf,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        if !(self.omega_rf > 0.0 && self.omega_rf.is_finite()) {
            return Err(TrapError::InvalidParameter(format!(
                "omega_rf must be > 0, got {}",
                self.omega_rf
            )));
        }
        if !((self.phase_diff - PI).abs() <= 0.2) {
            return Err(TrapError::InvalidParameter(format!(
                "phase_diff must lie within pi +/- 0.2 rad, got {}",
                self.phase_diff
            )));
        }
        let finite = [self.v_rf1, self.v_rf2, self.v_d1, self.v_d2, self.kappa_axial, self.kappa_rf]
            .iter()
            .chain(self.v_comp.iter())
            .chain(self.stray_field.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(TrapError::InvalidParameter("drive contains non-finite values".into()));
        }
        Ok(())
    }

    /// Sets both RF amplitudes from their mean and the relative asymmetry
    /// `delta = (v_rf2 - v_rf1) / mean`. Positive `delta` puts the y mode
    /// above the x mode.
    pub fn set_rf(&mut self, mean: f64, delta: f64) {
        self.v_rf1 = mean * (1.0 - 0.5 * delta);
        self.v_rf2 = mean * (1.0 + 0.5 * delta);
    }

    pub fn with_rf(mut self, mean: f64, delta: f64) -> Self {
        self.set_rf(mean, delta);
        self
    }

    pub fn v_rf_mean(&self) -> f64 {
        0.5 * (self.v_rf1 + self.v_rf2)
    }

    pub fn rf_asymmetry(&self) -> f64 {
        (self.v_rf2 - self.v_rf1) / self.v_rf_mean()
    }

    pub fn rf_period(&self) -> f64 {
        2.0 * PI / self.omega_rf
    }

    /// Common-mode compensation voltage (mean of C1..C4).
    pub fn comp_common(&self) -> f64 {
        self.v_comp.iter().sum::<f64>() / 4.0
    }

    /// Differential compensation voltages `(dV13, dV24)`: C1 gets `+dV13`
    /// and C3 `-dV13` relative to the common mode, likewise for C2/C4.
    pub fn comp_differential(&self) -> (f64, f64) {
        (
            0.5 * (self.v_comp[0] - self.v_comp[2]),
            0.5 * (self.v_comp[1] - self.v_comp[3]),
        )
    }

    /// Sets all four compensation voltages from a common mode and the two
    /// opposite-sign differential changes.
    pub fn set_compensation(&mut self, common: f64, dv13: f64, dv24: f64) {
        self.v_comp = [common + dv13, common + dv24, common - dv13, common - dv24];
    }

    /// Sets the endcaps from their sum and difference.
    pub fn set_endcaps(&mut self, sum: f64, diff: f64) {
        self.v_d1 = 0.5 * (sum + diff);
        self.v_d2 = 0.5 * (sum - diff);
    }
}
