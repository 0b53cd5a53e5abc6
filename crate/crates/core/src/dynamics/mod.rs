//! Single-ion propagation in the full time-dependent trap field.
//!
//! The integrator is velocity Verlet with the drag force treated implicitly
//! in the velocity half of the step. Laser interaction is reduced to an
//! intensity-modulated radiation-pressure force, linear drag and optional
//! Poisson-distributed recoil kicks.

mod forces;
mod simulate;
mod state;
mod sweep;
mod verlet;

pub use forces::ForceConfig;
pub use simulate::{simulate, write_trajectory_csv, TrajectoryRecord, MIN_STEPS_PER_RF_PERIOD};
pub use state::IonState;
pub use sweep::{excitation_sweep, SweepConfig, SweepDirection, SweepPoint, SweepResult};
pub use verlet::{step_verlet, Escape, Propagator};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt:.3e} s gives fewer than {min} steps per RF period")]
    TimeStepTooLarge { dt: f64, min: usize },
    #[error("initial state lies outside the confinement region")]
    InitialEscape,
}
