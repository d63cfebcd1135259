//! Complete elliptic integrals in the *modulus* convention,
//!
//! ```text
//! K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ),    E(k) = ∫₀^{π/2} dθ √(1 − k² sin²θ),
//! ```
//!
//! evaluated with the arithmetic–geometric mean.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_AGM_ITERATIONS: usize = 64;

/// Runs the AGM on `(1, k')` and returns `(agm, Σ 2^(n-1) c_n²)` with `c_0 = k`.
fn agm(k: f64, k_comp: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = k_comp;
    let mut sum = 0.5 * k * k;
    let mut pow2 = 0.5;
    for _ in 0..MAX_AGM_ITERATIONS {
        let c = 0.5 * (a - b);
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        pow2 *= 2.0;
        sum += pow2 * c * c;
        let converged = (a_next - b_next).abs() <= f64::EPSILON * a_next;
        a = a_next;
        b = b_next;
        if converged {
            break;
        }
    }
    (0.5 * (a + b), sum)
}

/// Complementary modulus `√(1 − k²)`, formed without cancellation near `k = 1`.
pub fn complementary(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

/// Complete elliptic integral of the first kind, `0 <= k < 1`.
pub fn ellip_k(k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::domain("k", k, "modulus must be non-negative"));
    }
    if k >= 1.0 {
        return Err(Error::Divergence(k));
    }
    let k_comp = complementary(k);
    if k_comp == 0.0 {
        return Err(Error::Divergence(k));
    }
    let (mean, _) = agm(k, k_comp);
    Ok(FRAC_PI_2 / mean)
}

/// K expressed through the complementary modulus `k' = √(1 − k²)`, `0 < k' <= 1`.
///
/// Near the logarithmic singularity `k'` is known far more precisely than `k`
/// itself, so callers close to a separatrix should use this form.
pub fn ellip_k_complement(k_comp: f64) -> Result<f64> {
    if !(k_comp > 0.0) {
        return Err(Error::Divergence(complementary(k_comp.clamp(0.0, 1.0))));
    }
    if k_comp > 1.0 {
        return Err(Error::domain(
            "k'",
            k_comp,
            "complementary modulus must lie in (0, 1]",
        ));
    }
    let k = complementary(k_comp);
    let (mean, _) = agm(k, k_comp);
    Ok(FRAC_PI_2 / mean)
}

/// Complete elliptic integral of the second kind, `0 <= k <= 1`.
pub fn ellip_e(k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::domain("k", k, "modulus must lie in [0, 1]"));
    }
    let k_comp = complementary(k);
    if k_comp == 0.0 {
        return Ok(1.0);
    }
    let (mean, sum) = agm(k, k_comp);
    Ok(FRAC_PI_2 / mean * (1.0 - sum))
}
