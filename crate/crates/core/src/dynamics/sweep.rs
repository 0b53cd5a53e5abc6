use std::f64::consts::TAU;

use super::{DynamicsError, ForceConfig, IonState, Propagator};
use crate::trapmodel::{FieldModel, IonSpecies};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

/// Timing of an excitation sweep, in modulation periods per frequency point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepConfig {
    pub settle_periods: f64,
    pub measure_periods: u32,
    /// Integration step; `None` uses an RF period / 200.
    pub dt: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { settle_periods: 200.0, measure_periods: 50, dt: None }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepPoint {
    /// Modulation angular frequency (rad/s).
    pub mod_freq: f64,
    /// Steady-state oscillation amplitude at `mod_freq` per lab axis (m).
    pub amplitude: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResult {
    pub direction: SweepDirection,
    pub points: Vec<SweepPoint>,
    /// The ion escaped; `points` holds the frequencies completed before.
    pub escaped: bool,
    pub final_state: IonState,
}

/// Steps the modulation frequency through `freqs`, carrying the ion state
/// from one point to the next, and records the amplitude of the response at
/// the modulation frequency.
///
/// After `settle_periods` the displacement is demodulated over an integer
/// number of modulation periods; the amplitude is `2 |sum (x - <x>) e^{-i phi}| / N`,
/// i.e. RMS times sqrt(2) of the band-passed signal.
pub fn excitation_sweep<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    template: &ForceConfig,
    freqs: &[f64],
    direction: SweepDirection,
    initial: &IonState,
    config: &SweepConfig,
) -> Result<SweepResult, DynamicsError> {
    template.validate()?;
    if freqs.is_empty() || freqs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(DynamicsError::InvalidParameter("sweep frequencies must be positive".into()));
    }
    let ordered = freqs.windows(2).all(|w| match direction {
        SweepDirection::Up => w[1] > w[0],
        SweepDirection::Down => w[1] < w[0],
    });
    if !ordered {
        return Err(DynamicsError::InvalidParameter(format!(
            "frequencies must be strictly {} for a {direction:?} sweep",
            if direction == SweepDirection::Up { "increasing" } else { "decreasing" }
        )));
    }
    if !(config.settle_periods >= 0.0) || config.measure_periods == 0 {
        return Err(DynamicsError::InvalidParameter("need settle >= 0 and measure >= 1 periods".into()));
    }
    let rf_period = TAU / model.omega_rf();
    let dt = config.dt.unwrap_or(rf_period / 200.0);
    if !(dt > 0.0) || dt * super::MIN_STEPS_PER_RF_PERIOD as f64 > rf_period * (1.0 + 1e-12) {
        return Err(DynamicsError::TimeStepTooLarge { dt, min: super::MIN_STEPS_PER_RF_PERIOD });
    }
    if !model.contains(&initial.position) {
        return Err(DynamicsError::InitialEscape);
    }

    let mut propagator = Propagator::new(model, ion, &ForceConfig { mod_freq: freqs[0], ..template.clone() });
    let mut state = *initial;
    let mut points = Vec::with_capacity(freqs.len());
    let mut escaped = false;

    'sweep: for &f in freqs {
        propagator.set_mod_freq(f, state.time);
        let period = TAU / f;
        let settle = (config.settle_periods * period / dt).round() as usize;
        let measure = (config.measure_periods as f64 * period / dt).round().max(1.0) as usize;
        for _ in 0..settle {
            match propagator.step(&state, dt) {
                Ok(s) => state = s,
                Err(_) => {
                    escaped = true;
                    break 'sweep;
                }
            }
        }
        let mut lock = LockIn::default();
        for _ in 0..measure {
            match propagator.step(&state, dt) {
                Ok(s) => state = s,
                Err(_) => {
                    escaped = true;
                    break 'sweep;
                }
            }
            lock.add(&state.position, propagator.mod_phase(state.time));
        }
        points.push(SweepPoint { mod_freq: f, amplitude: lock.amplitudes() });
    }

    Ok(SweepResult { direction, points, escaped, final_state: state })
}

#[derive(Default)]
struct LockIn {
    n: f64,
    sum: [f64; 3],
    sum_c: f64,
    sum_s: f64,
    xc: [f64; 3],
    xs: [f64; 3],
}

impl LockIn {
    fn add(&mut self, r: &crate::Vec3, phase: f64) {
        let (s, c) = phase.sin_cos();
        self.n += 1.0;
        self.sum_c += c;
        self.sum_s += s;
        for i in 0..3 {
            self.sum[i] += r[i];
            self.xc[i] += r[i] * c;
            self.xs[i] += r[i] * s;
        }
    }

    fn amplitudes(&self) -> [f64; 3] {
        std::array::from_fn(|i| {
            let mean = self.sum[i] / self.n;
            let c = self.xc[i] - mean * self.sum_c;
            let s = self.xs[i] - mean * self.sum_s;
            2.0 * c.hypot(s) / self.n
        })
    }
}
