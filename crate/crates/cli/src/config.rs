//! Flat `key = value` run configuration.
//!
//! Each line holds one key and a value with an explicit unit, either in the
//! value (`trap.r0 = 0.6389 mm`) or as a key suffix (`trap.r0_mm = 0.6389`).
//! `#` starts a comment. Unknown keys, duplicate keys and units that do not
//! match the key's dimension are rejected. Values are stored in SI, with
//! frequencies in Hz.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use taptrap::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
use taptrap::IonSpecies;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self { line: Some(line), key: key.map(str::to_string), message: message.into() }
    }

    pub fn key(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: Some(key.to_string()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key '{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Angle,
    Frequency,
    Voltage,
    ElectricField,
    Force,
    Time,
    MagneticField,
    Mass,
    Charge,
    Drag,
    Momentum,
    Rate,
    InverseLength,
    InverseArea,
    Ratio,
}

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9)],
            Dim::Angle => &[("rad", 1.0), ("deg", PI / 180.0), ("°", PI / 180.0)],
            Dim::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6)],
            Dim::Voltage => &[("V", 1.0), ("mV", 1e-3), ("kV", 1e3)],
            Dim::ElectricField => &[("V/m", 1.0), ("V/cm", 1e2), ("V/mm", 1e3)],
            Dim::Force => &[("N", 1.0), ("fN", 1e-15), ("aN", 1e-18), ("zN", 1e-21)],
            Dim::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6), ("ns", 1e-9)],
            Dim::MagneticField => &[("T", 1.0), ("mT", 1e-3), ("G", 1e-4)],
            Dim::Mass => &[("kg", 1.0), ("u", ATOMIC_MASS_UNIT)],
            Dim::Charge => &[("C", 1.0), ("e", ELEMENTARY_CHARGE)],
            Dim::Drag => &[("kg/s", 1.0)],
            Dim::Momentum => &[("kg*m/s", 1.0)],
            Dim::Rate => &[("1/s", 1.0)],
            Dim::InverseLength => &[("1/m", 1.0), ("1/mm", 1e3)],
            Dim::InverseArea => &[("1/m^2", 1.0), ("1/mm^2", 1e6)],
            Dim::Ratio => &[("", 1.0), ("%", 1e-2)],
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        self.units().iter().find(|(u, _)| *u == unit).map(|(_, f)| *f)
    }

    fn unit_list(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| if u.is_empty() { "<none>" } else { u })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Quantity(Dim),
    Integer,
    Bool,
    Choice(&'static [&'static str]),
    Direction,
    Path,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Integer(u64),
    Bool(bool),
    Text(String),
    Vector([f64; 3]),
}

impl Value {
    fn canonical(&self) -> String {
        match self {
            Value::Number(x) => format!("{x:e}"),
            Value::Integer(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(t) => t.clone(),
            Value::Vector(v) => format!("{:e},{:e},{:e}", v[0], v[1], v[2]),
        }
    }
}

use Dim::*;
use Kind::*;

/// Every accepted key with its kind and default.
pub const SCHEMA: &[(&str, Kind, &str)] = &[
    ("seed", Integer, "0"),
    ("model.backend", Choice(&["analytic", "solved"]), "analytic"),
    ("model.basis_file", Path, ""),
    ("model.region_radius", Quantity(Length), "0.3 mm"),
    ("model.region_half_length", Quantity(Length), "1 mm"),
    ("trap.taper_angle", Quantity(Angle), "10 deg"),
    ("trap.r0", Quantity(Length), "0.6389 mm"),
    ("trap.blade_length", Quantity(Length), "4 mm"),
    ("trap.endcap_gap", Quantity(Length), "4.8 mm"),
    ("trap.endcap_hole_diam", Quantity(Length), "0.8 mm"),
    ("trap.comp_diag_distance", Quantity(Length), "17 mm"),
    ("trap.comp_diam", Quantity(Length), "2 mm"),
    ("drive.rf_freq", Quantity(Frequency), "11.17 MHz"),
    ("drive.v_rf", Quantity(Voltage), "95 V"),
    ("drive.rf_asymmetry", Quantity(Ratio), "0.007"),
    ("drive.phase_diff", Quantity(Angle), "180 deg"),
    ("drive.v_d1", Quantity(Voltage), "10 V"),
    ("drive.v_d2", Quantity(Voltage), "10 V"),
    ("drive.v_c1", Quantity(Voltage), "0 V"),
    ("drive.v_c2", Quantity(Voltage), "0 V"),
    ("drive.v_c3", Quantity(Voltage), "0 V"),
    ("drive.v_c4", Quantity(Voltage), "0 V"),
    ("drive.kappa_axial", Quantity(Ratio), "0.05"),
    ("drive.kappa_rf", Quantity(Ratio), "1"),
    ("drive.beta_dipole", Quantity(InverseLength), "1 1/m"),
    ("drive.beta_quad_xy", Quantity(InverseArea), "0 1/m^2"),
    ("drive.stray_field_x", Quantity(ElectricField), "0 V/m"),
    ("drive.stray_field_y", Quantity(ElectricField), "0 V/m"),
    ("drive.stray_field_z", Quantity(ElectricField), "0 V/m"),
    ("drive.calibrate", Bool, "true"),
    ("drive.target_radial", Quantity(Frequency), "1.14 MHz"),
    ("drive.target_axial", Quantity(Frequency), "99.8 kHz"),
    ("ion.mass", Quantity(Mass), "39.962042 u"),
    ("ion.charge", Quantity(Charge), "1 e"),
    ("ion.label", Path, "40Ca+"),
    ("forces.drag_coefficient", Quantity(Drag), "0 kg/s"),
    ("forces.kick_rate", Quantity(Rate), "0 1/s"),
    ("forces.kick_momentum", Quantity(Momentum), "0 kg*m/s"),
    ("forces.mod_force", Quantity(Force), "0 N"),
    ("forces.mod_freq", Quantity(Frequency), "0 Hz"),
    ("forces.mod_direction", Direction, "x"),
    ("simulate.duration", Quantity(Time), "100 us"),
    ("simulate.steps_per_rf_period", Integer, "200"),
    ("simulate.sample_stride", Integer, "5"),
    ("simulate.offset_x", Quantity(Length), "1 um"),
    ("simulate.offset_y", Quantity(Length), "0 um"),
    ("simulate.offset_z", Quantity(Length), "0 um"),
    ("pseudo.x_half_width", Quantity(Length), "0.3 mm"),
    ("pseudo.z_min", Quantity(Length), "-1.5 mm"),
    ("pseudo.z_max", Quantity(Length), "1.5 mm"),
    ("pseudo.nx", Integer, "61"),
    ("pseudo.nz", Integer, "61"),
    ("scan.z_start", Quantity(Length), "-50 um"),
    ("scan.z_stop", Quantity(Length), "100 um"),
    ("scan.points", Integer, "16"),
    ("scan.axial_freq", Quantity(Frequency), "99.8 kHz"),
    ("scan.duration", Quantity(Time), "1 ms"),
    ("scan.excitation", Quantity(Length), "1 um"),
    ("sweep.start", Quantity(Frequency), "1.140 MHz"),
    ("sweep.stop", Quantity(Frequency), "1.164 MHz"),
    ("sweep.points", Integer, "13"),
    ("sweep.direction", Choice(&["both", "up", "down"]), "both"),
    ("sweep.force", Quantity(Force), "6e-19 N"),
    ("sweep.damping_rate", Quantity(Frequency), "5 kHz"),
    ("sweep.settle_periods", Quantity(Ratio), "400"),
    ("sweep.measure_periods", Integer, "50"),
    ("sweep.steps_per_rf_period", Integer, "200"),
    ("compensate.dv13_min", Quantity(Voltage), "-100 V"),
    ("compensate.dv13_max", Quantity(Voltage), "100 V"),
    ("compensate.dv24_min", Quantity(Voltage), "-100 V"),
    ("compensate.dv24_max", Quantity(Voltage), "100 V"),
    ("compensate.tolerance", Quantity(Voltage), "0.1 V"),
    ("compensate.rf_cycles", Quantity(Ratio), "200"),
    ("sidebands.b_field", Quantity(MagneticField), "3 G"),
    ("sidebands.beam_angle", Quantity(Angle), "45 deg"),
    ("sidebands.polarization", Quantity(Angle), "45 deg"),
    ("sidebands.max_order", Integer, "2"),
    ("sidebands.nu_x", Quantity(Frequency), "1.14 MHz"),
    ("sidebands.nu_y", Quantity(Frequency), "1.15 MHz"),
    ("sidebands.nu_z", Quantity(Frequency), "99.8 kHz"),
    ("sidebands.wavelength", Quantity(Length), "729.147 nm"),
    ("sidebands.radial_projection", Quantity(Angle), "0 deg"),
    ("sidebands.axial_projection", Quantity(Angle), "0 deg"),
    ("mesh.path", Path, ""),
    ("mesh.blade_width", Quantity(Length), "3 mm"),
    ("mesh.n_axial", Integer, "14"),
    ("mesh.n_width", Integer, "8"),
    ("mesh.endcap_outer", Quantity(Length), "1.2 mm"),
    ("mesh.n_ring", Integer, "3"),
    ("mesh.n_theta", Integer, "20"),
    ("mesh.include_compensation", Bool, "true"),
    ("mesh.triangle_cap", Integer, "20000"),
    ("calibrate.rotate_axes", Bool, "false"),
    ("calibrate.axis_angle", Quantity(Angle), "-22.5 deg"),
    ("calibrate.axis_voltage", Quantity(Voltage), "62.5 V"),
];

fn schema(key: &str) -> Option<Kind> {
    SCHEMA.iter().find(|(k, _, _)| *k == key).map(|(_, kind, _)| *kind)
}

/// Splits `text` into the longest leading float and the trimmed remainder.
/// `x * factor`, dividing by the inverse when that is an integer so decimal
/// prefixes round correctly (0.6389 mm gives 6.389e-4 m).
fn to_si(x: f64, factor: f64) -> f64 {
    let inv = (1.0 / factor).round();
    if factor < 1.0 && inv * factor == 1.0 { x / inv } else { x * factor }
}

fn split_number(text: &str) -> Option<(f64, &str)> {
    let mut ends: Vec<usize> = text.char_indices().map(|(i, _)| i).skip(1).collect();
    ends.push(text.len());
    ends.into_iter().rev().find_map(|end| {
        let head = &text[..end];
        if head.trim() != head {
            return None;
        }
        head.parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| (x, text[end..].trim()))
    })
}

fn parse_value(kind: Kind, raw: &str, key_unit: Option<&str>) -> Result<Value, String> {
    match kind {
        Quantity(dim) => {
            let (x, unit) = split_number(raw).ok_or_else(|| format!("'{raw}' is not a number"))?;
            let unit = match (key_unit, unit) {
                (Some(k), "") => k,
                (Some(_), u) => return Err(format!("unit given twice (key suffix and '{u}')")),
                (None, u) => u,
            };
            let factor = dim.factor(unit).ok_or_else(|| {
                if unit.is_empty() {
                    format!("missing unit (expected one of {})", dim.unit_list())
                } else {
                    format!("unknown unit '{unit}' (expected one of {})", dim.unit_list())
                }
            })?;
            Ok(Value::Number(to_si(x, factor)))
        }
        Integer => raw.parse::<u64>().map(Value::Integer).map_err(|_| format!("'{raw}' is not a non-negative integer")),
        Bool => match raw {
            "true" | "yes" | "1" => Ok(Value::Bool(true)),
            "false" | "no" | "0" => Ok(Value::Bool(false)),
            _ => Err(format!("'{raw}' is not a boolean")),
        },
        Choice(options) => options
            .iter()
            .find(|o| **o == raw)
            .map(|o| Value::Text(o.to_string()))
            .ok_or_else(|| format!("'{raw}' is not one of {}", options.join(", "))),
        Direction => {
            let v = match raw {
                "x" => [1.0, 0.0, 0.0],
                "y" => [0.0, 1.0, 0.0],
                "z" => [0.0, 0.0, 1.0],
                _ => {
                    let parts: Vec<f64> = raw
                        .split(',')
                        .map(|p| p.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| format!("'{raw}' is not x, y, z or a comma-separated vector"))?;
                    let [a, b, c] = parts[..] else {
                        return Err(format!("'{raw}' needs three components"));
                    };
                    [a, b, c]
                }
            };
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err("direction must be a non-zero vector".into());
            }
            Ok(Value::Vector(v.map(|c| c / n)))
        }
        Path => Ok(Value::Text(raw.to_string())),
    }
}

/// A fully resolved configuration: defaults overlaid with the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|(k, kind, d)| {
                let v = parse_value(*kind, d, None).unwrap_or_else(|e| panic!("bad default for {k}: {e}"));
                (k.to_string(), v)
            })
            .collect();
        let mut cfg = Self { values };
        // ion mass of the singly charged ion, electron removed
        cfg.set("ion.mass", Value::Number(IonSpecies::calcium40().mass));
        cfg
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(lineno, None, format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let (base, kind, key_unit) = resolve_key(key)
                .ok_or_else(|| ConfigError::at(lineno, Some(key), "unknown key"))?;
            if let Some(first) = seen.insert(base.clone(), lineno) {
                return Err(ConfigError::at(lineno, Some(key), format!("duplicate key (first set on line {first})")));
            }
            let v = parse_value(kind, value, key_unit.as_deref())
                .map_err(|m| ConfigError::at(lineno, Some(key), m))?;
            cfg.values.insert(base, v);
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    /// SI value of a quantity or ratio key.
    pub fn num(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(Value::Number(x)) => *x,
            other => panic!("{key} is not numeric: {other:?}"),
        }
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.values.get(key) {
            Some(Value::Integer(n)) => *n,
            other => panic!("{key} is not an integer: {other:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.values.get(key) {
            Some(Value::Bool(b)) => *b,
            other => panic!("{key} is not boolean: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.values.get(key) {
            Some(Value::Text(t)) => t,
            other => panic!("{key} is not text: {other:?}"),
        }
    }

    pub fn vector(&self, key: &str) -> [f64; 3] {
        match self.values.get(key) {
            Some(Value::Vector(v)) => *v,
            other => panic!("{key} is not a vector: {other:?}"),
        }
    }

    /// One `key = value` line per key in SI units, sorted by key.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {}\n", v.canonical())).collect()
    }
}

/// Accepts `key` or `key_<unit>` for quantity keys.
fn resolve_key(key: &str) -> Option<(String, Kind, Option<String>)> {
    if let Some(kind) = schema(key) {
        return Some((key.to_string(), kind, None));
    }
    let (base, unit) = key.rsplit_once('_')?;
    match schema(base)? {
        Quantity(dim) if dim.factor(unit).is_some() && !unit.is_empty() => {
            Some((base.to_string(), Quantity(dim), Some(unit.to_string())))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let cfg = RunConfig::default();
        assert!((cfg.num("trap.taper_angle") - 10f64.to_radians()).abs() < 1e-15);
        assert_eq!(cfg.num("drive.rf_freq"), 11.17e6);
        assert_eq!(cfg.int("scan.points"), 16);
    }

    #[test]
    fn units_in_value_and_key() {
        let cfg = RunConfig::parse("trap.r0 = 0.5 mm\ndrive.v_rf_kV = 0.1 # comment\n").unwrap();
        assert_eq!(cfg.num("trap.r0"), 0.5e-3);
        assert_eq!(cfg.num("drive.v_rf"), 100.0);
        let cfg = RunConfig::parse("drive.v_d1 = 12V\nsidebands.b_field = 2.5 G").unwrap();
        assert_eq!(cfg.num("drive.v_d1"), 12.0);
        assert!((cfg.num("sidebands.b_field") - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn errors_name_line_and_key() {
        let err = RunConfig::parse("\n\ntrap.r0 = 1 furlong\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.key.as_deref(), Some("trap.r0"));
        assert!(err.to_string().contains("unknown unit 'furlong'"));

        let err = RunConfig::parse("trap.r0 = 1").unwrap_err();
        assert!(err.message.contains("missing unit"));
        let err = RunConfig::parse("trap.radius = 1 mm").unwrap_err();
        assert_eq!(err.message, "unknown key");
        let err = RunConfig::parse("seed = 1\nseed = 2").unwrap_err();
        assert_eq!(err.line, Some(2));
        let err = RunConfig::parse("trap.r0_mm = 1 mm").unwrap_err();
        assert!(err.message.contains("twice"));
    }

    #[test]
    fn directions_are_normalized() {
        let cfg = RunConfig::parse("forces.mod_direction = 1, 1, 0").unwrap();
        let v = cfg.vector("forces.mod_direction");
        assert!((v[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn canonical_ignores_formatting() {
        let a = RunConfig::parse("trap.r0 = 0.6389 mm").unwrap();
        let b = RunConfig::parse("# note\ntrap.r0_mm   =   0.63890").unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.num("trap.r0"), 6.389e-4);
    }

    #[test]
    fn charge_unit_e_is_not_an_exponent() {
        let cfg = RunConfig::parse("ion.charge = 2e").unwrap();
        assert_eq!(cfg.num("ion.charge"), 2.0 * ELEMENTARY_CHARGE);
    }
}
