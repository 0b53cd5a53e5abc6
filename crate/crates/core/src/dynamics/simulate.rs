use std::collections::BTreeMap;
use std::io::{self, Write};

use super::{DynamicsError, ForceConfig, IonState, Propagator};
use crate::trapmodel::{FieldModel, IonSpecies};

/// Lower bound on time steps per RF period accepted by [`simulate`].
pub const MIN_STEPS_PER_RF_PERIOD: usize = 50;

/// Equally spaced ion states from one simulation run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub sample_stride: usize,
    pub samples: Vec<IonState>,
    /// The ion left the confinement region; `samples` ends with the last
    /// state inside it.
    pub escaped: bool,
    pub metadata: BTreeMap<String, String>,
}

impl TrajectoryRecord {
    /// Spacing between consecutive samples.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    /// Position component `axis` (0, 1, 2) of every sample.
    pub fn positions(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.position[axis]).collect()
    }

    pub fn velocities(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.velocity[axis]).collect()
    }
}

/// Integrates the ion for `duration` and keeps every `sample_stride`-th
/// state, including the initial one.
pub fn simulate<M: FieldModel + ?Sized>(
    model: &M,
    ion: &IonSpecies,
    initial: &IonState,
    duration: f64,
    dt: f64,
    forces: &ForceConfig,
    sample_stride: usize,
) -> Result<TrajectoryRecord, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(DynamicsError::InvalidParameter(format!("duration must be >= 0, got {duration}")));
    }
    if sample_stride == 0 {
        return Err(DynamicsError::InvalidParameter("sample stride must be >= 1".into()));
    }
    let rf_period = std::f64::consts::TAU / model.omega_rf();
    if dt * MIN_STEPS_PER_RF_PERIOD as f64 > rf_period * (1.0 + 1e-12) {
        return Err(DynamicsError::TimeStepTooLarge { dt, min: MIN_STEPS_PER_RF_PERIOD });
    }
    forces.validate()?;
    if !initial.is_finite() || !model.contains(&initial.position) {
        return Err(DynamicsError::InitialEscape);
    }

    let steps = (duration / dt * (1.0 + 1e-12)).floor() as usize;
    let mut samples = Vec::with_capacity(steps / sample_stride + 1);
    samples.push(*initial);
    let mut propagator = Propagator::new(model, ion, forces);
    let mut state = *initial;
    let mut escaped = false;
    for k in 1..=steps {
        match propagator.step(&state, dt) {
            Ok(mut next) => {
                next.time = initial.time + k as f64 * dt;
                state = next;
            }
            Err(e) => {
                escaped = true;
                if samples.last() != Some(&e.last_valid) {
                    samples.push(e.last_valid);
                }
                break;
            }
        }
        if k % sample_stride == 0 {
            samples.push(state);
        }
    }

    let mut metadata = BTreeMap::new();
    metadata.insert("ion".into(), ion.label.clone());
    metadata.insert("ion_mass_kg".into(), format!("{:e}", ion.mass));
    metadata.insert("ion_charge_c".into(), format!("{:e}", ion.charge));
    metadata.insert("omega_rf_rad_s".into(), format!("{:e}", model.omega_rf()));
    metadata.insert("dt_s".into(), format!("{dt:e}"));
    metadata.insert("sample_stride".into(), sample_stride.to_string());
    metadata.insert("drag_kg_s".into(), format!("{:e}", forces.drag_coefficient));
    metadata.insert("kick_rate_s".into(), format!("{:e}", forces.kick_rate));
    metadata.insert("kick_momentum".into(), format!("{:e}", forces.kick_momentum));
    metadata.insert("mod_force_n".into(), format!("{:e}", forces.mod_force_amp));
    metadata.insert("mod_freq_rad_s".into(), format!("{:e}", forces.mod_freq));
    metadata.insert("rng_seed".into(), forces.rng_seed.to_string());
    if escaped {
        metadata.insert("escaped".into(), "true".into());
    }

    Ok(TrajectoryRecord { dt, sample_stride, samples, escaped, metadata })
}

/// Writes `t,x,y,z,vx,vy,vz` rows in SI units, preceded by the metadata as
/// `# key = value` lines.
pub fn write_trajectory_csv<W: Write>(record: &TrajectoryRecord, mut out: W) -> io::Result<()> {
    for (k, v) in &record.metadata {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "t,x,y,z,vx,vy,vz")?;
    for s in &record.samples {
        let (p, v) = (s.position, s.velocity);
        writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", s.time, p.x, p.y, p.z, v.x, v.y, v.z)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trapmodel::HarmonicField;
    use crate::Vec3;

    #[test]
    fn sample_count() {
        let ion = IonSpecies::calcium40();
        let model = HarmonicField::isotropic(1e5, ion.charge_to_mass());
        let s = IonState::at_rest(Vec3::new(1e-6, 0.0, 0.0));
        let rec = simulate(&model, &ion, &s, 1e-4, 1e-7, &ForceConfig::default(), 7).unwrap();
        assert_eq!(rec.len(), 1000 / 7 + 1);
        assert!(!rec.escaped);
        let dtm = rec.sample_interval();
        assert!(rec.samples.windows(2).all(|w| ((w[1].time - w[0].time) - dtm).abs() < 1e-18));
    }

    #[test]
    fn rejects_coarse_step() {
        let ion = IonSpecies::calcium40();
        let model = HarmonicField::isotropic(1e5, ion.charge_to_mass());
        let s = IonState::at_rest(Vec3::zeros());
        let err = simulate(&model, &ion, &s, 1e-3, 2.0e-6, &ForceConfig::default(), 1).unwrap_err();
        assert!(matches!(err, DynamicsError::TimeStepTooLarge { .. }));
    }

    #[test]
    fn escape_truncates() {
        let ion = IonSpecies::calcium40();
        let model = HarmonicField { curvature: [0.0; 3], omega_rf: 1e3, radius: 1e-3 };
        let s = IonState::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 0.0);
        let rec = simulate(&model, &ion, &s, 1e-2, 1e-5, &ForceConfig::default(), 1).unwrap();
        assert!(rec.escaped);
        assert!(rec.samples.last().unwrap().position.x < 1e-3);
        assert_eq!(rec.metadata.get("escaped").map(String::as_str), Some("true"));
    }

    #[test]
    fn csv_header_and_rows() {
        let ion = IonSpecies::calcium40();
        let model = HarmonicField::isotropic(1e5, ion.charge_to_mass());
        let s = IonState::at_rest(Vec3::new(1e-6, 0.0, 0.0));
        let rec = simulate(&model, &ion, &s, 1e-6, 1e-7, &ForceConfig::default(), 1).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "t,x,y,z,vx,vy,vz");
        assert_eq!(lines.len(), rec.len() + 1);
        assert!(text.starts_with("# "));
    }
}
