use super::DomainError;

/// Radial secular frequency at axial position `z` of a tapered trap:
/// `omega0 / (1 - z tan(theta) / r0)^2`, strengthening towards `+z` for a
/// positive taper.
pub fn radial_freq_eq1(z: f64, omega0: f64, taper_angle: f64, r0: f64) -> Result<f64, DomainError> {
    radial_freq_eq1_pitch(z, omega0, taper_angle.tan() / r0)
}

/// Same as [`radial_freq_eq1`] with the shape collapsed into the pitch
/// `p = tan(theta)/r0`.
pub fn radial_freq_eq1_pitch(z: f64, omega0: f64, pitch: f64) -> Result<f64, DomainError> {
    let denom = 1.0 - z * pitch;
    if !(denom > 0.0) || !(z * pitch).abs().lt(&1.0) {
        return Err(DomainError::TaperPole { z, rho: denom });
    }
    Ok(omega0 / (denom * denom))
}
