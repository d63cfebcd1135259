//! Pinion transduction with rotational friction.
//!
//! Two limits have closed or semi-closed forms. For weak dissipation the
//! energy balance over one winding fixes the orbit energy `h_m`, and the
//! average velocity then follows from the conservative formula. For strong
//! dissipation the inertia term is dropped and the phase equation
//! `ε u̇ = −(c + sin u)`, `c = εV_R/V_S + w`, integrates in elementary functions.
//!
//! The free functions work in reduced units (velocities in V_S, loads in F);
//! [`DissipativeRegimeInputs`] wraps them in SI units.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::conservative::{pinion_velocity_skipping, rotation_mean_speed};
use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::special::ellip_e;

/// Dissipation force scale `F_D = ζ²λ/(2πIR²)`.
pub fn dissipation_force_scale(
    friction: f64,
    wavelength: f64,
    inertia: f64,
    radius: f64,
) -> Result<f64> {
    if !(friction >= 0.0) {
        return Err(Error::domain("zeta", friction, "must be non-negative"));
    }
    for (name, value) in [("lambda", wavelength), ("I", inertia), ("R", radius)] {
        if !(value > 0.0) {
            return Err(Error::domain(name, value, "must be positive"));
        }
    }
    Ok(friction * friction * wavelength / (2.0 * PI * inertia * radius * radius))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(
            "epsilon",
            epsilon,
            "dissipative results need epsilon > 0",
        ));
    }
    Ok(())
}

/// Energy gained per winding through drive and load, balanced against the
/// friction loss, as an effective drive `V_R/V_S + w/ε`.
fn effective_drive(vr: f64, epsilon: f64, w: f64) -> f64 {
    vr + w / epsilon
}

/// `(4/π)·√(h/2)·E(√(2/h))`, strictly increasing on `h >= 2`.
pub fn winding_drive(h: f64) -> Result<f64> {
    if !(h >= 2.0) {
        return Err(Error::domain("h", h, "winding orbits need h >= 2"));
    }
    Ok(4.0 / PI * (0.5 * h).sqrt() * ellip_e((2.0 / h).sqrt())?)
}

/// Reduced rack velocity below which the weakly damped pinion stays locked in,
/// `4/π − w/ε`.
pub fn lockin_threshold_weak(epsilon: f64, w: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let threshold = 4.0 / PI - w / epsilon;
    if threshold <= 0.0 {
        return Err(Error::NoLockIn {
            load: w,
            threshold: 4.0 / PI * epsilon,
        });
    }
    Ok(threshold)
}

/// Load ratio at which skipping sets in for a weakly damped pinion at reduced
/// rack velocity `vr`, `ε(4/π − vr)`; zero or negative means already skipping.
pub fn skipping_onset_load_weak(vr: f64, epsilon: f64) -> f64 {
    epsilon * (4.0 / PI - vr)
}

/// Solves `V_R/V_S + w/ε = (4/π)√(h_m/2)E(√(2/h_m))` for `h_m >= 2`.
pub fn solve_h_m(vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let drive = effective_drive(vr, epsilon, w);
    if !(drive >= 4.0 / PI) {
        return Err(Error::LockedIn(
            "effective drive below 4/π; the weak-dissipation orbit does not wind",
        ));
    }
    // winding_drive(2 drive² + 2) > drive, so the bracket holds the unique root
    let hi = 2.0 * drive * drive + 2.0;
    bisect(
        |h| Ok(winding_drive(h)? - drive),
        2.0,
        hi,
        1e-13 * hi,
        "h_m energy balance",
    )
}

/// Average pinion velocity (units of V_S) for weak dissipation; `vr` when locked in.
pub fn pinion_velocity_weak(vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if effective_drive(vr, epsilon, w) <= 4.0 / PI {
        return Ok(vr);
    }
    let h = solve_h_m(vr, epsilon, w)?;
    if h <= 2.0 {
        return Ok(vr);
    }
    pinion_velocity_skipping(h, vr, 1.0)
}

/// Load ratio at which [`pinion_velocity_weak`] vanishes.
pub fn stall_load_weak(vr: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let at = |w: f64| pinion_velocity_weak(vr, epsilon, w);
    let upper = 1.0;
    if at(upper)? > 0.0 {
        return Err(Error::NoRoot {
            what: "weak-dissipation stall load",
            lo: 0.0,
            hi: upper,
        });
    }
    bisect(at, 0.0, upper, 1e-12, "weak-dissipation stall load")
}

/// Combined forcing `c = εV_R/V_S + w` of the overdamped phase equation.
fn overdamped_forcing(vr: f64, epsilon: f64, w: f64) -> f64 {
    epsilon * vr + w
}

/// Winding period `2πε/√(c² − 1)` of the overdamped phase, in units of T.
pub fn overdamped_period(vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let c = overdamped_forcing(vr, epsilon, w);
    if !(c > 1.0) {
        return Err(Error::LockedIn(
            "overdamped forcing does not exceed the Casimir amplitude",
        ));
    }
    Ok(2.0 * PI * epsilon / ((c - 1.0) * (c + 1.0)).sqrt())
}

/// Overdamped phase `u(t)` in units of T, starting from `u(0) = 2 atan(1/c)`
/// and unwrapped so that it decreases continuously by 2π per period.
pub fn overdamped_phase(t: f64, vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    let period = overdamped_period(vr, epsilon, w)?;
    let a = 1.0 / overdamped_forcing(vr, epsilon, w);
    let b = ((1.0 - a) * (1.0 + a)).sqrt();
    // tan(u/2) = −a + b tan ψ with ψ(0) chosen so that tan(u(0)/2) = a
    let psi0 = (2.0 * a / b).atan();
    let psi = psi0 - PI * t / period;
    let poles = ((0.5 * PI - psi) / PI).floor();
    let reduced = psi + poles * PI;
    Ok(2.0 * (-a + b * reduced.tan()).atan() - 2.0 * PI * poles)
}

/// Average pinion velocity (units of V_S) with inertia neglected:
/// `V_R − √((V_R + w/ε)² − 1/ε²)`, or `V_R` when the phase locks.
pub fn pinion_velocity_overdamped(vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let c = overdamped_forcing(vr, epsilon, w);
    if c <= 1.0 {
        return Ok(vr);
    }
    Ok(vr - ((c - 1.0) * (c + 1.0)).sqrt() / epsilon)
}

/// Stall load ratio `√(1 + (εV_R/V_S)²) − εV_R/V_S` in the overdamped limit.
pub fn stall_load_strong(vr: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let x = epsilon * vr;
    // 1/(√(1+x²)+x) avoids cancellation at large x
    Ok(1.0 / ((1.0 + x * x).sqrt() + x))
}

/// Dissipative-regime quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipativeRegimeInputs {
    /// F (N).
    pub force: f64,
    /// F_D (N).
    pub dissipation_force: f64,
    /// ζ (kg·m²/s).
    pub friction: f64,
    /// R (m).
    pub radius: f64,
    /// W (N).
    pub load: f64,
    /// V_R (m/s).
    pub rack_velocity: f64,
    /// V_S (m/s).
    pub skipping_velocity: f64,
    /// λ (m).
    pub wavelength: f64,
}

impl DissipativeRegimeInputs {
    /// ε = √(F_D/F).
    pub fn epsilon(&self) -> f64 {
        (self.dissipation_force / self.force).sqrt()
    }

    pub fn load_ratio(&self) -> f64 {
        self.load / self.force
    }

    pub fn rack_ratio(&self) -> f64 {
        self.rack_velocity / self.skipping_velocity
    }

    /// ζV_R/R² + W < F: the separatrix is only weakly perturbed.
    pub fn is_weak(&self) -> bool {
        self.friction * self.rack_velocity / (self.radius * self.radius) + self.load < self.force
    }

    /// The overdamped closed form winds when V_R + WR²/ζ > FR²/ζ.
    pub fn overdamped_winds(&self) -> bool {
        self.friction * self.rack_velocity / (self.radius * self.radius) + self.load > self.force
    }

    /// Rack velocity (m/s) bounding the weak-dissipation locked-in phase,
    /// `((4/π)√(F·F_D) − W)·R²/ζ`.
    pub fn lockin_threshold_weak(&self) -> Result<f64> {
        Ok(lockin_threshold_weak(self.epsilon(), self.load_ratio())? * self.skipping_velocity)
    }

    /// Load (N) at which skipping starts, `(4/π)√(F·F_D) − ζV_R/R²`.
    pub fn skipping_onset_load_weak(&self) -> f64 {
        skipping_onset_load_weak(self.rack_ratio(), self.epsilon()) * self.force
    }

    pub fn solve_h_m(&self) -> Result<f64> {
        solve_h_m(self.rack_ratio(), self.epsilon(), self.load_ratio())
    }

    pub fn pinion_velocity_weak(&self) -> Result<f64> {
        Ok(
            pinion_velocity_weak(self.rack_ratio(), self.epsilon(), self.load_ratio())?
                * self.skipping_velocity,
        )
    }

    /// Large-V_R form `−WR²/ζ + ½V_S⁴/V_R³`.
    pub fn pinion_velocity_weak_asymptote(&self) -> f64 {
        let r2 = self.radius * self.radius;
        -self.load * r2 / self.friction
            + 0.5 * self.skipping_velocity.powi(4) / self.rack_velocity.powi(3)
    }

    /// Stall load (N) in the weak-dissipation regime.
    pub fn stall_force_weak(&self) -> Result<f64> {
        Ok(stall_load_weak(self.rack_ratio(), self.epsilon())? * self.force)
    }

    /// Winding period τ (s) of the overdamped phase.
    pub fn overdamped_period(&self) -> Result<f64> {
        let r2 = self.radius * self.radius;
        let lhs = self.rack_velocity + self.load * r2 / self.friction;
        let rhs = self.force * r2 / self.friction;
        if !(lhs > rhs) {
            return Err(Error::LockedIn(
                "τ is imaginary; the overdamped phase locks",
            ));
        }
        Ok(self.wavelength / ((lhs - rhs) * (lhs + rhs)).sqrt())
    }

    /// Overdamped phase u at time `t` (s).
    pub fn overdamped_trajectory(&self, t: f64) -> Result<f64> {
        let time_scale = self.wavelength / (2.0 * PI * self.skipping_velocity);
        overdamped_phase(
            t / time_scale,
            self.rack_ratio(),
            self.epsilon(),
            self.load_ratio(),
        )
    }

    pub fn pinion_velocity_overdamped(&self) -> Result<f64> {
        let r2 = self.radius * self.radius;
        let lhs = self.rack_velocity + self.load * r2 / self.friction;
        let rhs = self.force * r2 / self.friction;
        if lhs <= rhs {
            return Ok(self.rack_velocity);
        }
        Ok(self.rack_velocity - ((lhs - rhs) * (lhs + rhs)).sqrt())
    }

    /// `W_s = F[√(1 + x²) − x]` with `x = ζV_R/(FR²)`.
    pub fn stall_force_strong(&self) -> Result<f64> {
        if !(self.friction > 0.0) {
            return Err(Error::domain("zeta", self.friction, "must be positive"));
        }
        let x = self.friction * self.rack_velocity / (self.force * self.radius * self.radius);
        Ok(self.force / ((1.0 + x * x).sqrt() + x))
    }
}

/// Phase velocity magnitude `π/(kK)` at the weak-dissipation orbit energy.
pub fn weak_mean_speed(vr: f64, epsilon: f64, w: f64) -> Result<f64> {
    rotation_mean_speed(solve_h_m(vr, epsilon, w)?)
}
