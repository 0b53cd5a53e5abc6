//! Physical constants (CODATA 2018) and atomic data.

use std::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Coulomb constant 1/(4 pi eps0).
pub const COULOMB: f64 = 1.0 / (4.0 * PI * EPSILON_0);

/// Neutral-atom mass of 40Ca in atomic mass units (AME2016).
pub const CA40_ATOMIC_MASS_U: f64 = 39.962_590_863;

/// Landé g-factor of the 4S1/2 ground state of Ca+.
pub const G_S12: f64 = 2.002_25;
/// Landé g-factor of the 3D5/2 metastable state of Ca+.
pub const G_D52: f64 = 1.200_3;

/// Wavelength of the S1/2 - D5/2 quadrupole transition in Ca+.
pub const CA_QUADRUPOLE_WAVELENGTH: f64 = 729.147e-9;
