//! Trap geometry, drive parameters and the closed-form field model together
//! with everything derived from it: pseudopotential, secular frequencies,
//! Mathieu parameters, principal axes and drive calibration.

mod analytic;
mod calibrate;
mod drive;
mod eigen;
mod eq1;
mod field;
mod geometry;
mod harmonic;
mod mathieu;
mod pseudo;
mod species;

pub use analytic::AnalyticField;
pub use calibrate::{calibrate_axis_rotation, calibrate_drive};
pub use drive::{CompensationCoeffs, DriveConfig};
pub use eigen::symmetric_eigen3;
pub use eq1::{radial_freq_eq1, radial_freq_eq1_pitch};
pub use field::{DomainError, FieldModel, FieldSample};
pub use geometry::TrapGeometry;
pub use harmonic::HarmonicField;
pub use mathieu::{first_region_stable, mathieu_parameters, MathieuParams};
pub use pseudo::{
    effective_energy, effective_gradient, effective_hessian, find_equilibrium,
    find_radial_minimum, principal_axis_angle, pseudopotential, secular_frequencies,
    PseudoEnergy, SecularModes, HESSIAN_STEP,
};
pub use species::IonSpecies;

use thiserror::Error;

/// Errors raised by trap-model operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unstable configuration: {0}")]
    Unstable(String),
    #[error("undefined axes: radial modes are degenerate (relative splitting {splitting:.3e})")]
    UndefinedAxes { splitting: f64 },
    #[error("calibration failed: {0}")]
    Calibration(String),
}
