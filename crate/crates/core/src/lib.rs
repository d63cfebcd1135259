//! Dynamics of a non-contact rack and pinion coupled by the lateral Casimir
//! force: unit conversion, conservative and dissipative analytic results, a
//! numerical simulator and parameter sweeps.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod casimir_pfa;
pub mod conservative;
pub mod dissipative;
pub mod error;
pub mod regime;
pub mod roots;
pub mod simulator;
pub mod special;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use regime::RegimeLabel;
pub use simulator::{integrate, IntegrateOptions, PinionSystem, Trajectory};

/// Scientific notation with unit-conversion noise (`1.0000000000000001e-7`) rounded away.
pub(crate) fn tidy(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:e}")
}
