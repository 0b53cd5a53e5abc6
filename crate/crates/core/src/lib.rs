//! Simulation and analysis toolkit for a tapered (funnel-potential) Paul trap.
//!
//! The crate is split along the physics pipeline:
//!
//! * [`trapmodel`] — geometry, drive parameters, the closed-form tapered
//!   quadrupole field, pseudopotential, secular frequencies and calibration.
//! * [`fieldsolve`] — a surface-charge collocation solver that turns electrode
//!   meshes into an alternative [`FieldModel`] backend.
//! * [`dynamics`] — velocity Verlet propagation of a single ion in the full
//!   time-dependent field, with laser-like forces and frequency sweeps.
//! * [`analysis`] — spectra, peak finding, axial scans, fits and micromotion
//!   compensation.
//! * [`sidebands`] — Zeeman and motional sideband line positions.
//!
//! Everything is SI internally.

pub mod analysis;
pub mod constants;
pub mod dynamics;
pub mod fieldsolve;
pub mod sidebands;
pub mod trapmodel;

pub use nalgebra::{Matrix3, Vector3};

/// Cartesian 3-vector in SI units.
pub type Vec3 = Vector3<f64>;

pub use trapmodel::{
    AnalyticField, DomainError, DriveConfig, FieldModel, FieldSample, IonSpecies, TrapGeometry,
};
