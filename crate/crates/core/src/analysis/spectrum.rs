use std::io::{self, Write};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::AnalysisError;
use crate::dynamics::TrajectoryRecord;
use crate::Vec3;

pub const MIN_SPECTRUM_SAMPLES: usize = 1024;

/// One-sided power spectrum.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Spectrum {
    /// Bin frequencies (Hz), `k / (N dt)` for `k = 0..=N/2`.
    pub freq_axis: Vec<f64>,
    pub power: Vec<f64>,
    pub window: String,
    /// Bin spacing (Hz).
    pub resolution: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Index of the largest bin.
    pub fn argmax(&self) -> usize {
        (0..self.power.len()).max_by(|&a, &b| self.power[a].total_cmp(&self.power[b])).unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# window = {}", self.window)?;
        writeln!(out, "# resolution_hz = {:e}", self.resolution)?;
        writeln!(out, "freq_hz,power")?;
        for (f, p) in self.freq_axis.iter().zip(&self.power) {
            writeln!(out, "{f:e},{p:e}")?;
        }
        Ok(())
    }
}

/// Hann-windowed periodogram of a uniformly sampled real signal.
///
/// The mean is removed before windowing and reported as the power of bin 0,
/// so a constant signal puts all its power there. Remaining bins are scaled
/// so that they sum to the window-weighted mean square of the fluctuation.
pub fn periodogram(signal: &[f64], sample_interval: f64) -> Result<Spectrum, AnalysisError> {
    let n = signal.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(AnalysisError::TooFewSamples { got: n, min: MIN_SPECTRUM_SAMPLES });
    }
    if !(sample_interval > 0.0 && sample_interval.is_finite()) {
        return Err(AnalysisError::InvalidParameter("sample interval must be > 0".into()));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let mut buf: Vec<Complex<f64>> =
        signal.iter().zip(&window).map(|(x, w)| Complex::new((x - mean) * w, 0.0)).collect();
    let windowed_energy: f64 = buf.iter().map(|c| c.re * c.re).sum();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = 1.0 / (n as f64 * w2);
    let mut power: Vec<f64> = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || (n % 2 == 0 && k == half) { p } else { 2.0 * p }
        })
        .collect();
    let fluct_total: f64 = power.iter().sum();
    debug_assert!(
        (fluct_total - windowed_energy / w2).abs() <= 1e-9 * (windowed_energy / w2).max(f64::MIN_POSITIVE),
        "Parseval mismatch"
    );
    power[0] += mean * mean;

    let resolution = 1.0 / (n as f64 * sample_interval);
    Ok(Spectrum {
        freq_axis: (0..=half).map(|k| k as f64 * resolution).collect(),
        power,
        window: "hann".into(),
        resolution,
    })
}

/// Spectrum of position component `axis` (0 = x, 1 = y, 2 = z).
pub fn power_spectrum(traj: &TrajectoryRecord, axis: usize) -> Result<Spectrum, AnalysisError> {
    if axis > 2 {
        return Err(AnalysisError::InvalidParameter(format!("axis {axis} out of range")));
    }
    periodogram(&traj.positions(axis), traj.sample_interval())
}

/// Spectrum of the position projected on `direction`.
pub fn power_spectrum_along(traj: &TrajectoryRecord, direction: &Vec3) -> Result<Spectrum, AnalysisError> {
    let d = direction.normalize();
    let signal: Vec<f64> = traj.samples.iter().map(|s| s.position.dot(&d)).collect();
    periodogram(&signal, traj.sample_interval())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, dt: f64, f: f64) -> Vec<f64> {
        (0..n).map(|i| (std::f64::consts::TAU * f * i as f64 * dt).sin()).collect()
    }

    #[test]
    fn too_few_samples() {
        let err = periodogram(&[0.0; 100], 1.0).unwrap_err();
        assert_eq!(err, AnalysisError::TooFewSamples { got: 100, min: 1024 });
    }

    #[test]
    fn sinusoid_lands_in_its_bin() {
        let dt = 1e-3;
        let s = periodogram(&tone(4096, dt, 123.4), dt).unwrap();
        let k = s.argmax();
        assert!((s.freq_axis[k] - 123.4).abs() <= s.resolution);
    }

    #[test]
    fn constant_signal_only_in_bin_zero() {
        let s = periodogram(&[2.5; 2048], 1e-6).unwrap();
        assert_eq!(s.power[0], 6.25);
        assert!(s.power[1..].iter().all(|p| *p == 0.0));
    }

    #[test]
    fn axis_is_increasing_and_power_nonnegative() {
        let s = periodogram(&tone(1500, 1e-3, 50.0), 1e-3).unwrap();
        assert!(s.freq_axis.windows(2).all(|w| w[1] > w[0]));
        assert!(s.power.iter().all(|p| *p >= 0.0));
        assert_eq!(s.len(), 751);
    }

    #[test]
    fn parseval_for_unit_sinusoid() {
        // Windowed mean square of a unit sine is close to 1/2.
        let s = periodogram(&tone(8192, 1e-3, 100.0), 1e-3).unwrap();
        let total: f64 = s.power.iter().sum();
        assert!((total - 0.5).abs() < 1e-3);
    }
}
