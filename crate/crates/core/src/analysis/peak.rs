use super::{AnalysisError, Spectrum};

/// Prominence below which a peak is flagged as low confidence.
pub const LOW_CONFIDENCE_DB: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Peak {
    /// Refined peak frequency (Hz).
    pub frequency: f64,
    /// Uncertainty (Hz).
    pub uncertainty: f64,
    /// Peak power over the largest value pure noise would be expected to
    /// reach in the band, in dB.
    pub prominence_db: f64,
    pub low_confidence: bool,
}

/// Locates the strongest bin in `band` (Hz) and refines it by fitting a
/// parabola to the log-power of that bin and its two neighbours.
///
/// The noise reference for the prominence is the band median scaled by
/// `H_n / ln 2`, the expected maximum of `n` exponentially distributed
/// periodogram bins, so a noise-only band sits near 0 dB.
pub fn peak_frequency(spec: &Spectrum, band: (f64, f64)) -> Result<Peak, AnalysisError> {
    let (lo, hi) = band;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(AnalysisError::InvalidBand(format!("[{lo}, {hi}] Hz is empty")));
    }
    let first = spec.freq_axis.partition_point(|f| *f < lo);
    let end = spec.freq_axis.partition_point(|f| *f <= hi);
    if end < first + 3 {
        return Err(AnalysisError::InvalidBand(format!(
            "[{lo:.6e}, {hi:.6e}] Hz covers fewer than three bins"
        )));
    }
    let p = &spec.power;
    let k = (first..end).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(first);
    if k == first || k == end - 1 {
        return Err(AnalysisError::BandTooNarrow { frequency: spec.freq_axis[k] });
    }

    let b = p[k];
    let (delta, curvature) = if b > 0.0 {
        let floor = b * 1e-300_f64.max(f64::MIN_POSITIVE);
        let la = (p[k - 1].max(floor) / b).ln();
        let lc = (p[k + 1].max(floor) / b).ln();
        let denom = la + lc;
        if denom < 0.0 { (0.5 * (la - lc) / denom, -denom) } else { (0.0, 0.0) }
    } else {
        (0.0, 0.0)
    };
    let delta = delta.clamp(-0.5, 0.5);
    let res = spec.resolution;
    let frequency = spec.freq_axis[k] + delta * res;
    let curvature_term = if curvature > 0.0 { 0.1 * res / curvature.sqrt() } else { f64::INFINITY };
    let uncertainty = (0.1 * res).max(curvature_term);

    let mut band_power: Vec<f64> = p[first..end].to_vec();
    band_power.sort_by(f64::total_cmp);
    let n = band_power.len();
    let median = if n % 2 == 1 {
        band_power[n / 2]
    } else {
        0.5 * (band_power[n / 2 - 1] + band_power[n / 2])
    };
    let harmonic: f64 = (1..=n).map(|i| 1.0 / i as f64).sum();
    let noise_max = median * harmonic / std::f64::consts::LN_2;
    let prominence_db = if noise_max > 0.0 { 10.0 * (b / noise_max).log10() } else { f64::INFINITY };

    Ok(Peak {
        frequency,
        uncertainty,
        prominence_db,
        low_confidence: !(prominence_db >= LOW_CONFIDENCE_DB),
    })
}
