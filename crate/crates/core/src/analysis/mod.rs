//! Spectra, peak finding, characterization experiments and fits.
//!
//! Frequencies in [`Spectrum`] and [`ScanResult`] columns are in Hz; fit
//! parameters follow the trap-model conventions (rad/s, 1/m).

mod compensate;
mod fit;
mod micromotion;
mod peak;
mod scan;
mod spectrum;

pub use compensate::{compensate, compensation_metric, nelder_mead, CompensationOptions, CompensationResult, SimplexResult};
pub use fit::{fit_eq1, fit_linear_epsilon, Eq1AxisFit, Eq1Fit, LinearFit};
pub use micromotion::micromotion_metric;
pub use peak::{peak_frequency, Peak, LOW_CONFIDENCE_DB};
pub use scan::{
    position_endcaps, scan_axial, AnalyticFamily, AxialScanOptions, ModelFamily, ScanColumn,
    ScanResult, SolvedFamily,
};
pub use spectrum::{periodogram, power_spectrum, power_spectrum_along, Spectrum, MIN_SPECTRUM_SAMPLES};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::trapmodel::TrapError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("too few samples: {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },
    #[error("band too narrow: the maximum sits at the band edge ({frequency:.6e} Hz)")]
    BandTooNarrow { frequency: f64 },
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the ion escaped: {0}")]
    Escaped(String),
    #[error(transparent)]
    Trap(#[from] TrapError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("field backend: {0}")]
    Backend(String),
}
