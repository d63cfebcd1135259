//! Physical device description and the map to the dimensionless pinion equation
//!
//! ```text
//! u̇ = v,    v̇ = −sin u − ε (v + V_R/V_S) − W/F
//! ```
//!
//! with time measured in units of `T = √(Iλ / (2πFR²))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::casimir_pfa::{self, PfaInputs};
use crate::dissipative::dissipation_force_scale;
use crate::error::{Error, Result};

/// ħc in J·m, from CODATA ħ = 1.054571817e−34 J·s and c = 299792458 m/s.
pub const HBAR_C: f64 = 3.161_526_77e-26;

/// Corrugation amplitudes above this fraction of the gap leave the PFA's
/// small-amplitude domain.
const AMPLITUDE_ADVISORY_FRACTION: f64 = 0.2;

/// Moment of inertia of a solid homogeneous cylinder about its axis, `πρLR⁴/2`.
pub fn moment_of_inertia_solid_cylinder(density: f64, radius: f64, length: f64) -> Result<f64> {
    for (name, value) in [("rho", density), ("R", radius), ("L", length)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::domain(name, value, "must be positive"));
        }
    }
    Ok(PI * density * length * radius.powi(4) / 2.0)
}

/// Geometry, material and drive parameters of a rack and pinion, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalDevice {
    /// Pinion radius R (m).
    pub pinion_radius: f64,
    /// Pinion length L (m).
    pub pinion_length: f64,
    /// Corrugation wavelength λ shared by rack and pinion (m).
    pub wavelength: f64,
    /// Pinion corrugation amplitude a₁ (m).
    pub amplitude_pinion: f64,
    /// Rack corrugation amplitude a₂ (m).
    pub amplitude_rack: f64,
    /// Nearest surface separation H (m).
    pub gap: f64,
    /// Pinion mass density ρ (kg/m³).
    pub density: f64,
    /// Rotational friction coefficient ζ (kg·m²/s).
    pub friction: f64,
    /// External load W (N).
    pub load: f64,
    /// Rack velocity V_R (m/s).
    pub rack_velocity: f64,
    /// Lateral force amplitude F (N); computed from the PFA when absent.
    pub force_override: Option<f64>,
    /// Moment of inertia (kg·m²); solid cylinder when absent.
    pub inertia_override: Option<f64>,
}

impl PhysicalDevice {
    /// Checks the parameter invariants and returns advisories for inputs that are
    /// valid but outside the regime where the force model is trustworthy.
    pub fn validate(&self) -> Result<Vec<String>> {
        let positive = [
            ("R", self.pinion_radius),
            ("L", self.pinion_length),
            ("lambda", self.wavelength),
            ("rho", self.density),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(name, value, "must be positive"));
            }
        }
        let non_negative = [
            ("a1", self.amplitude_pinion),
            ("a2", self.amplitude_rack),
            ("H", self.gap),
            ("zeta", self.friction),
            ("W", self.load),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::domain(name, value, "must be non-negative"));
            }
        }
        if !(self.rack_velocity >= 0.0) || !self.rack_velocity.is_finite() {
            return Err(Error::domain(
                "V_R",
                self.rack_velocity,
                "must be non-negative; use the u0 -> -u0 symmetry for reversed racks",
            ));
        }
        if let Some(force) = self.force_override {
            if !(force > 0.0) || !force.is_finite() {
                return Err(Error::domain("F_override", force, "must be positive"));
            }
        }
        if let Some(inertia) = self.inertia_override {
            if !(inertia > 0.0) || !inertia.is_finite() {
                return Err(Error::domain("I_override", inertia, "must be positive"));
            }
        }

        let mut advisories = Vec::new();
        if self.force_override.is_none() {
            let limit = AMPLITUDE_ADVISORY_FRACTION * self.gap;
            for (name, a) in [("a1", self.amplitude_pinion), ("a2", self.amplitude_rack)] {
                if a > limit {
                    advisories.push(format!(
                        "{name} = {} m exceeds H/5 = {} m; the PFA force is leading order in a/H",
                        crate::tidy(a),
                        crate::tidy(limit)
                    ));
                }
            }
            advisories.extend(self.pfa_inputs().advisories());
        }
        Ok(advisories)
    }

    pub fn pfa_inputs(&self) -> PfaInputs {
        PfaInputs {
            gap: self.gap,
            wavelength: self.wavelength,
            amplitude_pinion: self.amplitude_pinion,
            amplitude_rack: self.amplitude_rack,
            length: self.pinion_length,
            radius: self.pinion_radius,
            density: self.density,
        }
    }

    pub fn moment_of_inertia(&self) -> Result<f64> {
        match self.inertia_override {
            Some(inertia) => Ok(inertia),
            None => moment_of_inertia_solid_cylinder(
                self.density,
                self.pinion_radius,
                self.pinion_length,
            ),
        }
    }

    /// Lateral force amplitude F, either supplied or from the PFA.
    pub fn force_amplitude(&self) -> Result<f64> {
        match self.force_override {
            Some(force) => Ok(force),
            None => casimir_pfa::lateral_force_amplitude(&self.pfa_inputs()),
        }
    }
}

/// Reduced parameters of the pinion equation together with the scales used to
/// build them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// ε = Tζ/I.
    pub epsilon: f64,
    /// w = W/F.
    pub load_ratio: f64,
    /// Initial phase velocity v₀ = (ẋ₀ − V_R)/V_S.
    pub v0: f64,
    /// V_R/V_S.
    pub rack_ratio: f64,
    /// T (s).
    pub time_scale: f64,
    /// V_S = λ/(2πT) (m/s).
    pub skipping_velocity: f64,
    /// F (N).
    pub force_amplitude: f64,
    /// F_D = ζ²λ/(2πIR²) (N).
    pub dissipation_force: f64,
    /// I (kg·m²).
    pub moment_of_inertia: f64,
}

/// Reduces a device to the dimensionless pinion equation. `pinion_initial_velocity`
/// is ẋ₀ in m/s; zero is a pinion starting at rest.
pub fn nondimensionalize(
    device: &PhysicalDevice,
    pinion_initial_velocity: f64,
) -> Result<DimensionlessParams> {
    device.validate()?;
    if !pinion_initial_velocity.is_finite() {
        return Err(Error::domain(
            "x0_dot",
            pinion_initial_velocity,
            "must be finite",
        ));
    }
    let force = device.force_amplitude()?;
    if !(force > 0.0) || !force.is_finite() {
        return Err(Error::domain(
            "F",
            force,
            "force amplitude must be positive to form a time scale",
        ));
    }
    let inertia = device.moment_of_inertia()?;
    let radius = device.pinion_radius;
    let wavelength = device.wavelength;

    let time_scale = (inertia * wavelength / (2.0 * PI * force * radius * radius)).sqrt();
    let skipping_velocity = wavelength / (2.0 * PI * time_scale);
    let dissipation_force = dissipation_force_scale(device.friction, wavelength, inertia, radius)?;

    Ok(DimensionlessParams {
        epsilon: time_scale * device.friction / inertia,
        load_ratio: device.load / force,
        v0: (pinion_initial_velocity - device.rack_velocity) / skipping_velocity,
        rack_ratio: device.rack_velocity / skipping_velocity,
        time_scale,
        skipping_velocity,
        force_amplitude: force,
        dissipation_force,
        moment_of_inertia: inertia,
    })
}

/// Physical quantity carried by a config key, used to resolve unit suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Length,
    Density,
    Friction,
    Force,
    Velocity,
    Inertia,
}

impl Quantity {
    fn scale(self, unit: &str) -> Option<f64> {
        let scale = match (self, unit) {
            (Quantity::Length, "m") => 1.0,
            (Quantity::Length, "mm") => 1e-3,
            (Quantity::Length, "um" | "µm" | "μm") => 1e-6,
            (Quantity::Length, "nm") => 1e-9,
            (Quantity::Density, "kg/m3" | "kg/m^3") => 1.0,
            (Quantity::Density, "g/cm3" | "g/cm^3") => 1e3,
            (Quantity::Friction, "kg*m^2/s" | "kg.m2/s") => 1.0,
            (Quantity::Force, "N") => 1.0,
            (Quantity::Force, "mN") => 1e-3,
            (Quantity::Force, "uN" | "µN" | "μN") => 1e-6,
            (Quantity::Force, "nN") => 1e-9,
            (Quantity::Force, "pN") => 1e-12,
            (Quantity::Force, "fN") => 1e-15,
            (Quantity::Velocity, "m/s") => 1.0,
            (Quantity::Velocity, "mm/s") => 1e-3,
            (Quantity::Velocity, "um/s" | "µm/s" | "μm/s") => 1e-6,
            (Quantity::Velocity, "nm/s") => 1e-9,
            (Quantity::Inertia, "kg*m^2" | "kg.m2") => 1.0,
            _ => return None,
        };
        Some(scale)
    }
}

/// Config keys, their quantity, and the SI unit assumed when no suffix is given.
pub const CONFIG_KEYS: [(&str, &str); 13] = [
    ("R", "pinion radius, m (also mm, um, nm)"),
    ("L", "pinion length, m (also mm, um, nm)"),
    ("lambda", "corrugation wavelength, m (also mm, um, nm)"),
    ("a1", "pinion corrugation amplitude, m (also mm, um, nm)"),
    ("a2", "rack corrugation amplitude, m (also mm, um, nm)"),
    ("H", "gap, m (also mm, um, nm)"),
    ("rho", "pinion density, kg/m3 (also g/cm3)"),
    ("zeta", "rotational friction coefficient, kg*m^2/s"),
    ("W", "external load, N (also mN, uN, nN, pN, fN)"),
    ("V_R", "rack velocity, m/s (also mm/s, um/s, nm/s)"),
    (
        "F_override",
        "lateral force amplitude, N (also mN, uN, nN, pN, fN)",
    ),
    ("I_override", "moment of inertia, kg*m^2"),
    (
        "x0_dot",
        "initial pinion contact velocity, m/s (also mm/s, um/s, nm/s)",
    ),
];

fn quantity_of(key: &str) -> Option<Quantity> {
    Some(match key {
        "R" | "L" | "lambda" | "a1" | "a2" | "H" => Quantity::Length,
        "rho" => Quantity::Density,
        "zeta" => Quantity::Friction,
        "W" | "F_override" => Quantity::Force,
        "V_R" | "x0_dot" => Quantity::Velocity,
        "I_override" => Quantity::Inertia,
        _ => return None,
    })
}

/// A device plus the initial pinion velocity, as read from a flat
/// `key = value [unit]` config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub device: PhysicalDevice,
    /// ẋ₀ (m/s).
    pub pinion_initial_velocity: f64,
}

impl DeviceConfig {
    pub fn nondimensionalize(&self) -> Result<DimensionlessParams> {
        nondimensionalize(&self.device, self.pinion_initial_velocity)
    }
}

impl FromStr for DeviceConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: Vec<(&'static str, f64)> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config {
                    line: line_no,
                    message: format!("expected `key = value`, found `{line}`"),
                })?;
            let key = key.trim();
            let (canonical, _) = CONFIG_KEYS
                .iter()
                .find(|(name, _)| *name == key)
                .ok_or_else(|| Error::Config {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                })?;
            let quantity = quantity_of(canonical).expect("every config key has a quantity");
            let mut tokens = rest.split_whitespace();
            let number = tokens.next().ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("key `{key}` has no value"),
            })?;
            let mut value: f64 = number.parse().map_err(|_| Error::Config {
                line: line_no,
                message: format!("key `{key}`: cannot parse `{number}` as a number"),
            })?;
            if let Some(unit) = tokens.next() {
                let scale = quantity.scale(unit).ok_or_else(|| Error::Config {
                    line: line_no,
                    message: format!("key `{key}`: unsupported unit `{unit}`"),
                })?;
                value *= scale;
            }
            if let Some(extra) = tokens.next() {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("key `{key}`: unexpected trailing `{extra}`"),
                });
            }
            if values.iter().any(|(k, _)| k == canonical) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("key `{key}` given twice"),
                });
            }
            values.push((canonical, value));
        }

        let get = |key: &str| values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let force_override = get("F_override");
        let mut required = vec!["R", "L", "lambda", "rho", "V_R"];
        if force_override.is_none() {
            required.extend(["a1", "a2", "H"]);
        }
        let missing: Vec<String> = required
            .iter()
            .filter(|key| get(key).is_none())
            .map(|key| key.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingParameters(missing));
        }

        Ok(DeviceConfig {
            device: PhysicalDevice {
                pinion_radius: get("R").unwrap_or_default(),
                pinion_length: get("L").unwrap_or_default(),
                wavelength: get("lambda").unwrap_or_default(),
                amplitude_pinion: get("a1").unwrap_or(0.0),
                amplitude_rack: get("a2").unwrap_or(0.0),
                gap: get("H").unwrap_or(0.0),
                density: get("rho").unwrap_or_default(),
                friction: get("zeta").unwrap_or(0.0),
                load: get("W").unwrap_or(0.0),
                rack_velocity: get("V_R").unwrap_or_default(),
                force_override,
                inertia_override: get("I_override"),
            },
            pinion_initial_velocity: get("x0_dot").unwrap_or(0.0),
        })
    }
}

impl fmt::Display for DeviceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.device;
        writeln!(f, "R = {:e}", d.pinion_radius)?;
        writeln!(f, "L = {:e}", d.pinion_length)?;
        writeln!(f, "lambda = {:e}", d.wavelength)?;
        writeln!(f, "a1 = {:e}", d.amplitude_pinion)?;
        writeln!(f, "a2 = {:e}", d.amplitude_rack)?;
        writeln!(f, "H = {:e}", d.gap)?;
        writeln!(f, "rho = {:e}", d.density)?;
        writeln!(f, "zeta = {:e}", d.friction)?;
        writeln!(f, "W = {:e}", d.load)?;
        writeln!(f, "V_R = {:e}", d.rack_velocity)?;
        if let Some(force) = d.force_override {
            writeln!(f, "F_override = {force:e}")?;
        }
        if let Some(inertia) = d.inertia_override {
            writeln!(f, "I_override = {inertia:e}")?;
        }
        writeln!(f, "x0_dot = {:e}", self.pinion_initial_velocity)
    }
}
