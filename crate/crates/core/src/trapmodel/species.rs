use crate::constants::{ATOMIC_MASS_UNIT, CA40_ATOMIC_MASS_U, ELECTRON_MASS, ELEMENTARY_CHARGE};

use super::TrapError;

/// A trapped ion species.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IonSpecies {
    /// Mass in kg.
    pub mass: f64,
    /// Charge in C.
    pub charge: f64,
    pub label: String,
}

impl IonSpecies {
    pub fn new(mass: f64, charge: f64, label: impl Into<String>) -> Result<Self, TrapError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(TrapError::InvalidParameter(format!("ion mass must be > 0, got {mass}")));
        }
        if charge == 0.0 || !charge.is_finite() {
            return Err(TrapError::InvalidParameter("ion charge must be non-zero".into()));
        }
        Ok(Self { mass, charge, label: label.into() })
    }

    /// Singly charged 40Ca+.
    pub fn calcium40() -> Self {
        Self {
            mass: CA40_ATOMIC_MASS_U * ATOMIC_MASS_UNIT - ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
            label: "40Ca+".into(),
        }
    }

    pub fn charge_to_mass(&self) -> f64 {
        self.charge / self.mass
    }
}

impl Default for IonSpecies {
    fn default() -> Self {
        Self::calcium40()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_species() {
        assert!(IonSpecies::new(0.0, 1.0, "x").is_err());
        assert!(IonSpecies::new(1.0, 0.0, "x").is_err());
        assert!(IonSpecies::new(1e-26, ELEMENTARY_CHARGE, "x").is_ok());
    }

    #[test]
    fn calcium_mass() {
        let ca = IonSpecies::calcium40();
        assert!((ca.mass / ATOMIC_MASS_UNIT - 39.9620).abs() < 1e-3);
    }
}
