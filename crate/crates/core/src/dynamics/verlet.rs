use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, UnitSphere};

use super::{ForceConfig, IonState};
use crate::trapmodel::{FieldModel, IonSpecies};
use crate::Vec3;

/// The ion left the model's confinement region.
#[derive(Debug, Clone, PartialEq)]
pub struct Escape {
    /// Last state that was still inside the region.
    pub last_valid: IonState,
    /// Position the step would have moved to.
    pub attempted: Vec3,
}

/// Velocity Verlet propagator for one ion.
///
/// Drag enters the velocity update implicitly,
/// `v' (1 + gamma dt / 2m) = v + dt/2 (a_old + a_new)`, with `a_old` holding
/// the drag at the old velocity. Without drag and kicks the step is
/// time-reversible. The field acceleration at the current point is cached so
/// each step costs one field evaluation.
pub struct Propagator<'a, M: FieldModel + ?Sized> {
    model: &'a M,
    ion: IonSpecies,
    forces: ForceConfig,
    rng: ChaCha8Rng,
    kicks: Option<Poisson<f64>>,
    kick_dt: f64,
    mod_t0: f64,
    mod_phase0: f64,
    cache: Option<(Vec3, f64, Vec3)>,
}

impl<'a, M: FieldModel + ?Sized> Propagator<'a, M> {
    pub fn new(model: &'a M, ion: &IonSpecies, forces: &ForceConfig) -> Self {
        Self {
            model,
            ion: ion.clone(),
            forces: forces.clone(),
            rng: ChaCha8Rng::seed_from_u64(forces.rng_seed),
            kicks: None,
            kick_dt: f64::NAN,
            mod_t0: 0.0,
            mod_phase0: 0.0,
            cache: None,
        }
    }

    pub fn forces(&self) -> &ForceConfig {
        &self.forces
    }

    /// Phase of the intensity modulation at time `t`.
    pub fn mod_phase(&self, t: f64) -> f64 {
        self.mod_phase0 + self.forces.mod_freq * (t - self.mod_t0)
    }

    /// Changes the modulation frequency at time `t` keeping the phase
    /// continuous.
    pub fn set_mod_freq(&mut self, mod_freq: f64, t: f64) {
        let phase = self.mod_phase(t).rem_euclid(std::f64::consts::TAU);
        self.mod_phase0 = phase;
        self.mod_t0 = t;
        self.forces.mod_freq = mod_freq;
    }

    /// Field plus modulated-force acceleration (no drag).
    fn conservative_accel(&mut self, r: &Vec3, t: f64) -> Option<Vec3> {
        if let Some((cr, ct, a)) = self.cache {
            if cr == *r && ct == t {
                return Some(a);
            }
        }
        if !self.model.contains(r) {
            return None;
        }
        let sample = self.model.sample(r).ok()?;
        let grad = sample.gradient_at(self.model.omega_rf() * t);
        let mut a = grad * (-self.ion.charge / self.ion.mass);
        if self.forces.mod_force_amp != 0.0 {
            a += self.forces.modulated_force(self.mod_phase(t)) / self.ion.mass;
        }
        self.cache = Some((*r, t, a));
        Some(a)
    }

    /// Advances `state` by `dt`. A negative `dt` integrates backwards in time.
    pub fn step(&mut self, state: &IonState, dt: f64) -> Result<IonState, Escape> {
        let escape = |attempted| Escape { last_valid: *state, attempted };
        let gamma_m = self.forces.drag_coefficient / self.ion.mass;
        let a_cons = self.conservative_accel(&state.position, state.time).ok_or(escape(state.position))?;
        let a_old = a_cons - state.velocity * gamma_m;

        let position = state.position + state.velocity * dt + a_old * (0.5 * dt * dt);
        let time = state.time + dt;
        if !position.iter().all(|c| c.is_finite()) {
            return Err(escape(position));
        }
        let a_new = self.conservative_accel(&position, time).ok_or(escape(position))?;
        let mut velocity =
            (state.velocity + (a_old + a_new) * (0.5 * dt)) / (1.0 + 0.5 * gamma_m * dt);

        if self.forces.kick_rate > 0.0 && self.forces.kick_momentum != 0.0 {
            velocity += self.draw_kicks(dt.abs());
        }
        Ok(IonState { position, velocity, time })
    }

    fn draw_kicks(&mut self, dt: f64) -> Vec3 {
        if self.kick_dt != dt {
            self.kicks = Poisson::new(self.forces.kick_rate * dt).ok();
            self.kick_dt = dt;
        }
        let Some(dist) = self.kicks else { return Vec3::zeros() };
        let n = dist.sample(&mut self.rng) as u64;
        let dv = self.forces.kick_momentum / self.ion.mass;
        let mut total = Vec3::zeros();
        for _ in 0..n {
            let d: [f64; 3] = UnitSphere.sample(&mut self.rng);
            total += Vec3::new(d[0], d[1], d[2]) * dv;
        }
        total
    }
}

/// One velocity Verlet step with a freshly seeded propagator.
pub fn step_verlet<M: FieldModel + ?Sized>(
    state: &IonState,
    model: &M,
    ion: &IonSpecies,
    forces: &ForceConfig,
    dt: f64,
) -> Result<IonState, Escape> {
    Propagator::new(model, ion, forces).step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trapmodel::HarmonicField;

    fn free_space() -> HarmonicField {
        HarmonicField { curvature: [0.0; 3], omega_rf: 1.0, radius: 1.0 }
    }

    #[test]
    fn free_flight() {
        let ion = IonSpecies::calcium40();
        let s = IonState::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 0.0);
        let n = step_verlet(&s, &free_space(), &ion, &ForceConfig::default(), 1e-6).unwrap();
        assert!((n.position.x - 1e-6).abs() < 1e-18);
        assert_eq!(n.time, 1e-6);
        assert_eq!(n.velocity, s.velocity);
    }

    #[test]
    fn escape_reports_last_valid_state() {
        let ion = IonSpecies::calcium40();
        let s = IonState::new(Vec3::new(0.999, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 0.0);
        let err = step_verlet(&s, &free_space(), &ion, &ForceConfig::default(), 0.01).unwrap_err();
        assert_eq!(err.last_valid, s);
        assert!(err.attempted.x > 1.0);
    }

    #[test]
    fn kicks_are_seeded() {
        let ion = IonSpecies::calcium40();
        let forces = ForceConfig { kick_rate: 1e7, kick_momentum: 1e-27, rng_seed: 7, ..Default::default() };
        let run = |f: &ForceConfig| {
            let model = free_space();
            let mut p = Propagator::new(&model, &ion, f);
            let mut s = IonState::at_rest(Vec3::zeros());
            for _ in 0..1000 {
                s = p.step(&s, 1e-8).unwrap();
            }
            s
        };
        let a = run(&forces);
        assert_eq!(a, run(&forces));
        assert!(a.velocity.norm() > 0.0);
        let other = ForceConfig { rng_seed: 8, ..forces.clone() };
        assert_ne!(a, run(&other));
    }

    #[test]
    fn modulation_phase_is_continuous() {
        let ion = IonSpecies::calcium40();
        let model = free_space();
        let forces = ForceConfig { mod_force_amp: 1e-21, mod_freq: 3.0, ..Default::default() };
        let mut p = Propagator::new(&model, &ion, &forces);
        let before = p.mod_phase(2.0);
        p.set_mod_freq(5.0, 2.0);
        let after = p.mod_phase(2.0);
        assert!((before.sin() - after.sin()).abs() < 1e-12);
        assert!((p.mod_phase(3.0) - after - 5.0).abs() < 1e-12);
    }
}
