//! Line positions of the S1/2 to D5/2 quadrupole transition of a trapped ion:
//! first-order Zeeman structure, motional sideband combs and Lamb-Dicke
//! parameters.
//!
//! The g-factors are the standard atomic values `g_S = 2.00225` for
//! 4S1/2 and `g_D = 1.2003` for 3D5/2 of 40Ca+.

use thiserror::Error;

use crate::constants::{BOHR_MAGNETON, G_D52, G_S12, HBAR, PLANCK};
use crate::trapmodel::IonSpecies;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SidebandError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Laser beam direction and polarization relative to the magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BeamGeometry {
    /// Angle between the beam wave vector and the field (rad).
    pub angle: f64,
    /// Angle between the polarization and the plane spanned by the field and
    /// the wave vector (rad).
    pub polarization: f64,
}

impl BeamGeometry {
    pub fn new(angle: f64, polarization: f64) -> Self {
        Self { angle, polarization }
    }

    pub fn parallel() -> Self {
        Self::new(0.0, std::f64::consts::FRAC_PI_4)
    }

    /// Relative quadrupole coupling for a change `delta_m` of the magnetic
    /// quantum number.
    pub fn coupling(&self, delta_m: i32) -> f64 {
        let (phi, gamma) = (self.angle, self.polarization);
        let (sg, cg) = gamma.sin_cos();
        let norm = 1.0 / 6f64.sqrt();
        match delta_m.abs() {
            0 => 0.5 * (cg * (2.0 * phi).sin()).abs(),
            1 => norm * (cg * (2.0 * phi).cos()).hypot(sg * phi.cos()),
            2 => norm * (0.5 * cg * (2.0 * phi).sin()).hypot(sg * phi.sin()),
            _ => 0.0,
        }
    }
}

impl Default for BeamGeometry {
    fn default() -> Self {
        Self::new(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ZeemanLine {
    pub m_ground: f64,
    pub m_excited: f64,
    pub delta_m: i32,
    /// Offset from the zero-field line center (Hz).
    pub offset: f64,
    /// Relative coupling strength for the beam geometry.
    pub coupling: f64,
}

/// Couplings below this value are treated as forbidden.
const COUPLING_FLOOR: f64 = 1e-12;

/// Zeeman components with `|delta m| <= 2` that the beam can drive at field
/// `b` (T), sorted by offset.
pub fn zeeman_lines(b: f64, beam: &BeamGeometry) -> Result<Vec<ZeemanLine>, SidebandError> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(SidebandError::InvalidParameter(format!("field must be >= 0, got {b}")));
    }
    let scale = BOHR_MAGNETON * b / PLANCK;
    let mut lines = Vec::with_capacity(10);
    for mg2 in [-1, 1] {
        for me2 in [-5, -3, -1, 1, 3, 5] {
            let dm2: i32 = me2 - mg2;
            if dm2.abs() > 4 {
                continue;
            }
            let delta_m = dm2 / 2;
            let coupling = beam.coupling(delta_m);
            if coupling < COUPLING_FLOOR {
                continue;
            }
            let (m_ground, m_excited) = (0.5 * mg2 as f64, 0.5 * me2 as f64);
            lines.push(ZeemanLine {
                m_ground,
                m_excited,
                delta_m,
                offset: scale * (G_D52 * m_excited - G_S12 * m_ground),
                coupling,
            });
        }
    }
    lines.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    Ok(lines)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SidebandLine {
    pub base: ZeemanLine,
    /// Sideband orders along (x, y, z).
    pub orders: [i32; 3],
    /// `sum n_i nu_i` (Hz).
    pub motional_offset: f64,
    /// `base.offset + motional_offset` (Hz).
    pub offset: f64,
}

/// All sidebands of `line` with `sum |n_i| <= max_total_order`, including the
/// carrier, sorted by offset. `secular` holds (nu_x, nu_y, nu_z) in Hz.
pub fn sideband_comb(
    line: &ZeemanLine,
    secular: [f64; 3],
    max_total_order: u32,
) -> Result<Vec<SidebandLine>, SidebandError> {
    if secular.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(SidebandError::InvalidParameter("secular frequencies must be > 0".into()));
    }
    if max_total_order == 0 {
        return Err(SidebandError::InvalidParameter("maximum order must be >= 1".into()));
    }
    let n = max_total_order as i32;
    let mut out = Vec::new();
    for nx in -n..=n {
        for ny in -(n - nx.abs())..=(n - nx.abs()) {
            let rest = n - nx.abs() - ny.abs();
            for nz in -rest..=rest {
                let orders = [nx, ny, nz];
                let motional_offset: f64 =
                    orders.iter().zip(&secular).map(|(k, f)| *k as f64 * f).sum();
                out.push(SidebandLine {
                    base: *line,
                    orders,
                    motional_offset,
                    offset: line.offset + motional_offset,
                });
            }
        }
    }
    out.sort_by(|a, b| a.offset.total_cmp(&b.offset).then(a.orders.cmp(&b.orders)));
    Ok(out)
}

/// Lamb-Dicke parameter `k |cos(angle)| sqrt(hbar / (2 m omega))` of a mode
/// with angular frequency `omega` probed at `wavelength`. Projections below
/// 1e-12 count as orthogonal.
pub fn lamb_dicke(
    omega: f64,
    ion: &IonSpecies,
    wavelength: f64,
    projection_angle: f64,
) -> Result<f64, SidebandError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(SidebandError::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(SidebandError::InvalidParameter("wavelength must be > 0".into()));
    }
    let projection = projection_angle.cos().abs();
    let projection = if projection < 1e-12 { 0.0 } else { projection };
    let k = std::f64::consts::TAU / wavelength;
    Ok(k * projection * (HBAR / (2.0 * ion.mass * omega)).sqrt())
}
