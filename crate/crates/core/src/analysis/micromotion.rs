use super::AnalysisError;
use crate::dynamics::TrajectoryRecord;

/// RF-synchronous velocity amplitude (m/s).
///
/// For each axis the Hann-weighted Fourier component of the velocity at
/// `omega_rf` is converted to an amplitude, `2 |sum w v e^{-i omega t}| / sum w`,
/// and the three amplitudes are summed.
pub fn micromotion_metric(traj: &TrajectoryRecord, omega_rf: f64) -> Result<f64, AnalysisError> {
    if !(omega_rf > 0.0) {
        return Err(AnalysisError::InvalidParameter("omega_rf must be > 0".into()));
    }
    let n = traj.samples.len();
    let period = std::f64::consts::TAU / omega_rf;
    let span = traj.sample_interval() * n.saturating_sub(1) as f64;
    if span < 100.0 * period * (1.0 - 1e-9) {
        return Err(AnalysisError::InvalidParameter(format!(
            "record spans {:.1} RF cycles, need at least 100",
            span / period
        )));
    }
    if traj.sample_interval() >= 0.5 * period {
        return Err(AnalysisError::InvalidParameter("record is sampled below twice the RF frequency".into()));
    }
    let mut sum_w = 0.0;
    let mut acc = [(0.0, 0.0); 3];
    for (i, s) in traj.samples.iter().enumerate() {
        let w = 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos();
        let (sin, cos) = (omega_rf * s.time).sin_cos();
        sum_w += w;
        for (k, a) in acc.iter_mut().enumerate() {
            a.0 += w * s.velocity[k] * cos;
            a.1 += w * s.velocity[k] * sin;
        }
    }
    Ok(acc.iter().map(|(c, s)| 2.0 * c.hypot(*s) / sum_w).sum())
}
