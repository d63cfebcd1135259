//! Exact results for the dissipation-free pinion: the energy integral, periods,
//! the jerk-averaged pinion velocity in the skipping phase, and the saddle-loop
//! structure under an external load.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regime::RegimeLabel;
use crate::special::ellip_k_complement;

/// Half-width of the energy band around a separatrix that is reported as
/// [`RegimeLabel::Separatrix`].
pub const SEPARATRIX_BAND: f64 = 1e-12;

/// Orbit family of the unloaded pendulum at a given energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyClass {
    Oscillation,
    Separatrix,
    Rotation,
}

/// Energy `h = ½v² + 1 − cos u` of a pinion released at rest, where the
/// initial phase velocity is `−V_R/V_S`.
pub fn energy_h(u0: f64, vr_ratio: f64) -> f64 {
    0.5 * vr_ratio * vr_ratio + 1.0 - u0.cos()
}

/// Conserved quantity `h' = ½v² + 1 − cos u + w·u` with load ratio `w`.
pub fn loaded_energy(u: f64, v: f64, w: f64) -> f64 {
    0.5 * v * v + 1.0 - u.cos() + w * u
}

pub fn classify_conservative(h: f64) -> EnergyClass {
    if h < 2.0 - SEPARATRIX_BAND {
        EnergyClass::Oscillation
    } else if h > 2.0 + SEPARATRIX_BAND {
        EnergyClass::Rotation
    } else {
        EnergyClass::Separatrix
    }
}

/// Period `4K(√(h/2))` of a bounded oscillation, in units of T.
pub fn oscillation_period(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 2.0) {
        return Err(Error::domain("h", h, "oscillations need 0 < h < 2"));
    }
    oscillation_period_from_deficit(2.0 - h)
}

/// Oscillation period in terms of the energy deficit `2 − h` below the
/// separatrix, which stays resolvable when `h` itself rounds to 2.
pub fn oscillation_period_from_deficit(deficit: f64) -> Result<f64> {
    if !(deficit > 0.0 && deficit < 2.0) {
        return Err(Error::domain("2 - h", deficit, "must lie in (0, 2)"));
    }
    // k² = h/2, so k'² = deficit/2
    Ok(4.0 * ellip_k_complement((0.5 * deficit).sqrt())?)
}

/// Modulus pair `(k, k')` with `k = √(2/h)` for a rotation at energy `h > 2`.
fn rotation_modulus(h: f64) -> Result<(f64, f64)> {
    if !(h > 2.0) || !h.is_finite() {
        return Err(Error::domain("h", h, "winding motion needs h > 2"));
    }
    Ok(((2.0 / h).sqrt(), ((h - 2.0) / h).sqrt()))
}

/// Magnitude of the time-averaged phase velocity on a rotation, `π/(kK(k))`.
pub fn rotation_mean_speed(h: f64) -> Result<f64> {
    let (k, k_comp) = rotation_modulus(h)?;
    Ok(PI / (k * ellip_k_complement(k_comp)?))
}

/// Time for one 2π winding at energy `h > 2`, `2kK(k)`.
pub fn rotation_period(h: f64) -> Result<f64> {
    Ok(2.0 * PI / rotation_mean_speed(h)?)
}

/// Jerk-averaged pinion velocity in the skipping phase,
/// `V_P = V_R − πV_S / (√(2/h)·K(√(2/h)))`.
pub fn pinion_velocity_skipping(h: f64, rack_velocity: f64, skipping_velocity: f64) -> Result<f64> {
    Ok(rack_velocity - skipping_velocity * rotation_mean_speed(h)?)
}

/// Rack velocity (in units of V_S) above which a pinion released at rest with
/// phase mismatch `u0` skips: `√(2(1 + cos u₀))`.
pub fn skipping_threshold(u0: f64) -> f64 {
    (2.0 * (1.0 + u0.cos())).max(0.0).sqrt()
}

/// Energy `h'_s` of the saddle loop that separates trapped oscillations from
/// runaway motion under a load ratio `0 <= w < 1`.
pub fn saddle_loop_energy(w: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::domain("w", w, "load ratio must be non-negative"));
    }
    if w >= 1.0 {
        return Err(Error::NoLockedRegime(w));
    }
    Ok(1.0 + (1.0 - w * w).sqrt() - (PI - w.asin()) * w)
}

/// Shifts `u` by whole turns into the well `(−π + asin w, π + asin w]` bounded
/// by the escape saddle on the left.
pub fn reduce_to_well(u: f64, w: f64) -> f64 {
    let left = -PI + w.clamp(-1.0, 1.0).asin();
    let turns = ((u - left) / (2.0 * PI)).ceil() - 1.0;
    let reduced = u - 2.0 * PI * turns;
    if reduced <= left {
        reduced + 2.0 * PI
    } else {
        reduced
    }
}

/// Loaded skipping threshold in units of V_S for a rest start: the rack
/// velocity at which `h'` reaches `h'_s`; zero when the start already lies
/// outside the saddle loop.
pub fn loaded_skipping_threshold(u0: f64, w: f64) -> Result<f64> {
    let hs = saddle_loop_energy(w)?;
    let u = reduce_to_well(u0, w);
    let potential = loaded_energy(u, 0.0, w);
    Ok((2.0 * (hs - potential)).max(0.0).sqrt())
}

/// Regime and `V_P/V_S` of a frictionless pinion released at rest.
///
/// Under load the skipping pinion accelerates without bound, so its
/// average velocity is reported as `−∞`.
pub fn conservative_regime(u0: f64, vr_ratio: f64, w: f64) -> Result<(RegimeLabel, f64)> {
    if !(vr_ratio >= 0.0) {
        return Err(Error::domain("V_R/V_S", vr_ratio, "must be non-negative"));
    }
    if w == 0.0 {
        let h = energy_h(u0, vr_ratio);
        return Ok(match classify_conservative(h) {
            EnergyClass::Oscillation => (RegimeLabel::LockedIn, vr_ratio),
            EnergyClass::Separatrix => (RegimeLabel::Separatrix, vr_ratio),
            EnergyClass::Rotation => {
                let vp = pinion_velocity_skipping(h, vr_ratio, 1.0)?;
                (RegimeLabel::skipping(vp), vp)
            }
        });
    }
    let hs = saddle_loop_energy(w)?;
    let h = loaded_energy(reduce_to_well(u0, w), -vr_ratio, w);
    Ok(if h < hs - SEPARATRIX_BAND {
        (RegimeLabel::LockedIn, vr_ratio)
    } else if h > hs + SEPARATRIX_BAND {
        (RegimeLabel::SkipReverse, f64::NEG_INFINITY)
    } else {
        (RegimeLabel::Separatrix, vr_ratio)
    })
}
