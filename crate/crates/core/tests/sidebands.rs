use std::f64::consts::{FRAC_PI_2, TAU};

use proptest::prelude::*;
use taptrap::constants::CA_QUADRUPOLE_WAVELENGTH;
use taptrap::sidebands::{lamb_dicke, sideband_comb, zeeman_lines, BeamGeometry};
use taptrap::trapmodel::IonSpecies;

const NU: [f64; 3] = [1.14e6, 1.15e6, 99.8e3];

fn carrier() -> taptrap::sidebands::ZeemanLine {
    zeeman_lines(3e-4, &BeamGeometry::default()).unwrap()[3]
}

#[test]
fn general_geometry_gives_ten_lines_with_valid_quantum_numbers() {
    let lines = zeeman_lines(3e-4, &BeamGeometry::default()).unwrap();
    assert_eq!(lines.len(), 10);
    for l in &lines {
        assert!(l.delta_m.abs() <= 2);
        assert_eq!(l.m_excited - l.m_ground, l.delta_m as f64);
        assert!(l.coupling > 0.0);
    }
    assert!(lines.windows(2).all(|w| w[0].offset <= w[1].offset));
}

#[test]
fn first_order_comb_has_seven_lines() {
    let comb = sideband_comb(&carrier(), NU, 1).unwrap();
    assert_eq!(comb.len(), 7);
    let base = carrier().offset;
    let mut shifts: Vec<f64> = comb.iter().map(|l| l.offset - base).collect();
    shifts.sort_by(f64::total_cmp);
    let mut expected = vec![0.0];
    for nu in NU {
        expected.extend([nu, -nu]);
    }
    expected.sort_by(f64::total_cmp);
    for (a, b) in shifts.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(comb.iter().any(|l| l.orders == [0, 0, 0]));
}

#[test]
fn second_order_comb_contains_hybrids_and_axial_ladders() {
    let comb = sideband_comb(&carrier(), NU, 2).unwrap();
    assert_eq!(comb.len(), 25);
    for orders in [[1, 0, -1], [-1, 0, 1], [0, 1, 1], [1, -1, 0], [0, 0, 2]] {
        assert!(comb.iter().any(|l| l.orders == orders), "{orders:?}");
    }
    // around the +x sideband the axial ladder sits at +-nu_z
    let at = |o: [i32; 3]| comb.iter().find(|l| l.orders == o).unwrap().offset;
    assert!((at([1, 0, 1]) - at([1, 0, 0]) - NU[2]).abs() < 1e-6);
    assert!((at([1, 0, 0]) - at([1, 0, -1]) - NU[2]).abs() < 1e-6);
    assert!(comb.iter().all(|l| l.orders.iter().map(|n| n.abs()).sum::<i32>() <= 2));
}

#[test]
fn comb_is_symmetric_about_its_carrier() {
    for order in 1..=3 {
        let line = carrier();
        let comb = sideband_comb(&line, NU, order).unwrap();
        for l in &comb {
            let mirrored = line.offset - l.motional_offset;
            assert!(comb.iter().any(|m| (m.offset - mirrored).abs() < 1e-6), "order {order}");
        }
    }
}

#[test]
fn comb_rejects_bad_inputs() {
    assert!(sideband_comb(&carrier(), NU, 0).is_err());
    assert!(sideband_comb(&carrier(), [1e6, 0.0, 1e5], 1).is_err());
    assert!(zeeman_lines(-1e-4, &BeamGeometry::default()).is_err());
}

#[test]
fn lamb_dicke_reference_values() {
    let ion = IonSpecies::calcium40();
    // k sqrt(hbar / (2 m omega)) evaluated by hand for 729.147 nm
    let axial = lamb_dicke(TAU * 99.8e3, &ion, CA_QUADRUPOLE_WAVELENGTH, 0.0).unwrap();
    let radial = lamb_dicke(TAU * 1.14e6, &ion, CA_QUADRUPOLE_WAVELENGTH, 0.0).unwrap();
    assert!((axial - 0.307).abs() < 1e-3, "{axial}");
    assert!((radial - 0.0908).abs() < 5e-4, "{radial}");
    assert_eq!(lamb_dicke(TAU * 1e6, &ion, CA_QUADRUPOLE_WAVELENGTH, FRAC_PI_2).unwrap(), 0.0);
    assert!(lamb_dicke(0.0, &ion, CA_QUADRUPOLE_WAVELENGTH, 0.0).is_err());
}

proptest! {
    #[test]
    fn zeeman_offsets_are_linear_in_field(b in 1e-6f64..1e-2, k in 0.1f64..10.0) {
        let beam = BeamGeometry::default();
        let a = zeeman_lines(b, &beam).unwrap();
        let s = zeeman_lines(b * k, &beam).unwrap();
        for (x, y) in a.iter().zip(&s) {
            prop_assert_eq!((x.m_ground, x.m_excited), (y.m_ground, y.m_excited));
            prop_assert!((y.offset - k * x.offset).abs() <= 1e-9 * y.offset.abs().max(1.0));
        }
    }

    #[test]
    fn lamb_dicke_scales_as_inverse_root_omega(w in 1e4f64..1e8, k in 0.01f64..100.0, angle in 0.0f64..1.5) {
        let ion = IonSpecies::calcium40();
        let a = lamb_dicke(w, &ion, CA_QUADRUPOLE_WAVELENGTH, angle).unwrap();
        let b = lamb_dicke(w * k, &ion, CA_QUADRUPOLE_WAVELENGTH, angle).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((b * k.sqrt() / a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn any_beam_angle_gives_ten_or_fewer_lines(angle in 0.0f64..FRAC_PI_2, pol in 0.0f64..FRAC_PI_2) {
        let lines = zeeman_lines(3e-4, &BeamGeometry::new(angle, pol)).unwrap();
        prop_assert!(lines.len() <= 10);
        prop_assert!(lines.iter().all(|l| l.delta_m.abs() <= 2));
    }
}
