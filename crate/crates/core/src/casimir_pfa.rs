//! Lateral Casimir force between the corrugated pinion and rack in the
//! proximity force approximation (perfect metals, leading order in the
//! corrugation amplitudes), and the skipping velocity it implies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HBAR_C;

/// Stated in scan metadata: the force model assumes perfectly reflecting plates.
pub const PERFECT_METAL_NOTE: &str = "perfect-metal boundaries; finite-conductivity corrections \
expected for gaps below the plasma wavelength (~136 nm for gold)";

/// Plasma wavelength of gold (m), below which the perfect-metal model overestimates the force.
pub const GOLD_PLASMA_WAVELENGTH: f64 = 136e-9;

/// `12π/√35`, the decay rate of the empirical α in units of 1/λ.
fn alpha_rate() -> f64 {
    12.0 * PI / 35f64.sqrt()
}

/// Empirical fit to the PFA geometry factor, `α_e(x) = cosh(12πx/√35)^(−4/9)` with `x = H/λ`.
pub fn alpha_empirical(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("H/lambda", x, "must be non-negative"));
    }
    let z = alpha_rate() * x;
    // cosh overflows near z = 710; use ln cosh z = z + ln((1 + e^{-2z})/2)
    let ln_cosh = z + (0.5 * (1.0 + (-2.0 * z).exp())).ln();
    Ok((-4.0 / 9.0 * ln_cosh).exp())
}

/// Geometry and material of the pinion–rack pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaInputs {
    /// H (m).
    pub gap: f64,
    /// λ (m).
    pub wavelength: f64,
    /// a₁ (m).
    pub amplitude_pinion: f64,
    /// a₂ (m).
    pub amplitude_rack: f64,
    /// L (m).
    pub length: f64,
    /// R (m).
    pub radius: f64,
    /// ρ (kg/m³).
    pub density: f64,
}

impl PfaInputs {
    fn check(&self) -> Result<()> {
        let fields = [
            ("H", self.gap),
            ("lambda", self.wavelength),
            ("a1", self.amplitude_pinion),
            ("a2", self.amplitude_rack),
            ("L", self.length),
            ("R", self.radius),
            ("rho", self.density),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::domain(name, value, "PFA inputs must be positive"));
            }
        }
        Ok(())
    }

    /// The proximity approximation is only trusted for H ≲ R, and the
    /// perfect-metal model only for gaps above the plasma wavelength.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.gap < GOLD_PLASMA_WAVELENGTH {
            out.push(format!(
                "H = {} m is below the gold plasma wavelength; expect finite-conductivity corrections",
                crate::tidy(self.gap)
            ));
        }
        if self.gap > self.radius {
            out.push(format!(
                "H = {} m exceeds R = {} m; the proximity force approximation is unreliable",
                crate::tidy(self.gap),
                crate::tidy(self.radius)
            ));
        }
        out
    }
}

const FORCE_PREFACTOR: f64 = 7.0 * PI * PI * PI * PI * std::f64::consts::SQRT_2 / 3072.0;
const VELOCITY_PREFACTOR_SQ: f64 = 7.0 * PI * PI * std::f64::consts::SQRT_2 / 3072.0;

/// Lateral force amplitude F (N) with the empirical α.
pub fn lateral_force_amplitude(inp: &PfaInputs) -> Result<f64> {
    let alpha = alpha_empirical(inp.gap / inp.wavelength.max(f64::MIN_POSITIVE))?;
    lateral_force_amplitude_with(inp, alpha)
}

/// Lateral force amplitude with a caller-supplied α(H/λ), e.g. tabulated exact values.
pub fn lateral_force_amplitude_with(inp: &PfaInputs, alpha: f64) -> Result<f64> {
    inp.check()?;
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha", alpha, "must be positive"));
    }
    Ok(FORCE_PREFACTOR
        * HBAR_C
        * inp.amplitude_pinion
        * inp.amplitude_rack
        * inp.length
        * inp.radius.sqrt()
        / (inp.wavelength * inp.gap.powf(4.5))
        * alpha)
}

/// Skipping velocity V_S (m/s) of a solid cylindrical pinion, with the empirical α.
pub fn skipping_velocity_physical(inp: &PfaInputs) -> Result<f64> {
    let alpha = alpha_empirical(inp.gap / inp.wavelength.max(f64::MIN_POSITIVE))?;
    skipping_velocity_physical_with(inp, alpha)
}

pub fn skipping_velocity_physical_with(inp: &PfaInputs, alpha: f64) -> Result<f64> {
    inp.check()?;
    if !(alpha > 0.0) {
        return Err(Error::domain("alpha", alpha, "must be positive"));
    }
    let h = inp.gap;
    Ok(VELOCITY_PREFACTOR_SQ.sqrt()
        * (HBAR_C / (inp.density * h.powi(4))).sqrt()
        * (inp.amplitude_pinion * inp.amplitude_rack / (h * h)).sqrt()
        * (h / inp.radius).powf(0.75)
        * alpha.sqrt())
}

/// One row of a gap scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkipVelocityRow {
    /// H (m).
    pub gap: f64,
    /// V_S (m/s).
    pub skipping_velocity: f64,
    /// ω = V_S/R (rad/s).
    pub angular_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

/// `n` points from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match spacing {
                    Spacing::Linear => lo + (hi - lo) * f,
                    Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * f).exp(),
                }
            })
            .collect(),
    }
}

/// Skipping velocity over a range of gaps; the `gap` field of `base` is ignored.
pub fn skip_velocity_scan(
    base: &PfaInputs,
    gap_range: (f64, f64),
    n_points: usize,
    spacing: Spacing,
) -> Result<Vec<SkipVelocityRow>> {
    let (lo, hi) = gap_range;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::domain(
            "H_range",
            lo,
            "gap range must be positive and increasing",
        ));
    }
    if n_points < 2 {
        return Err(Error::domain(
            "n_points",
            n_points as f64,
            "need at least 2 points",
        ));
    }
    grid(lo, hi, n_points, spacing)
        .into_iter()
        .map(|gap| {
            let inp = PfaInputs { gap, ..*base };
            let v = skipping_velocity_physical(&inp)?;
            Ok(SkipVelocityRow {
                gap,
                skipping_velocity: v,
                angular_velocity: v / inp.radius,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::moment_of_inertia_solid_cylinder;
    use approx::assert_relative_eq;

    fn reference() -> PfaInputs {
        PfaInputs {
            gap: 100e-9,
            wavelength: 1e-6,
            amplitude_pinion: 10e-9,
            amplitude_rack: 10e-9,
            length: 10e-6,
            radius: 10e-6,
            density: 19300.0,
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha_empirical(0.0).unwrap(), 1.0);
        assert_relative_eq!(
            alpha_empirical(1.0).unwrap(),
            0.080_132_403_047_628_97,
            max_relative = 1e-13
        );
        assert!(alpha_empirical(-0.1).is_err());
        // no overflow far into the tail
        let tail = alpha_empirical(500.0).unwrap();
        assert!((0.0..1e-300).contains(&tail));
    }

    #[test]
    fn alpha_is_decreasing_in_unit_interval() {
        let mut previous = alpha_empirical(0.0).unwrap();
        for i in 1..=400 {
            let a = alpha_empirical(i as f64 * 0.01).unwrap();
            assert!(a < previous && a > 0.0);
            previous = a;
        }
    }

    #[test]
    fn reference_force_and_velocity() {
        // Frozen from a 30-digit evaluation of the closed forms.
        assert_relative_eq!(
            lateral_force_amplitude(&reference()).unwrap(),
            9.117_910_901_902_647e-13,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            skipping_velocity_physical(&reference()).unwrap(),
            6.918_614_693_042_608e-5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn force_is_linear_in_amplitudes_and_length() {
        let base = lateral_force_amplitude(&reference()).unwrap();
        let doubled_a1 = PfaInputs {
            amplitude_pinion: 20e-9,
            ..reference()
        };
        let doubled_l = PfaInputs {
            length: 20e-6,
            ..reference()
        };
        assert_relative_eq!(
            lateral_force_amplitude(&doubled_a1).unwrap(),
            2.0 * base,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            lateral_force_amplitude(&doubled_l).unwrap(),
            2.0 * base,
            max_relative = 1e-14
        );
    }

    #[test]
    fn velocity_matches_time_scale_construction() {
        let inp = reference();
        let f = lateral_force_amplitude(&inp).unwrap();
        let i = moment_of_inertia_solid_cylinder(inp.density, inp.radius, inp.length).unwrap();
        let t = (i * inp.wavelength / (2.0 * PI * f * inp.radius * inp.radius)).sqrt();
        assert_relative_eq!(
            skipping_velocity_physical(&inp).unwrap(),
            inp.wavelength / (2.0 * PI * t),
            max_relative = 1e-12
        );
    }

    #[test]
    fn velocity_independent_of_length() {
        let a = skipping_velocity_physical(&reference()).unwrap();
        let b = skipping_velocity_physical(&PfaInputs {
            length: 3.7e-6,
            ..reference()
        })
        .unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn scan_is_monotone() {
        let rows = skip_velocity_scan(&reference(), (10e-9, 2e-6), 60, Spacing::Log).unwrap();
        assert_eq!(rows.len(), 60);
        for pair in rows.windows(2) {
            assert!(pair[1].skipping_velocity < pair[0].skipping_velocity);
        }
        assert!(skip_velocity_scan(&reference(), (1e-7, 1e-8), 10, Spacing::Log).is_err());
    }
}
