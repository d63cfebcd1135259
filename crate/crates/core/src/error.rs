use thiserror::Error;

use crate::simulator::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// K(m) has a logarithmic singularity at m = 1.
    #[error("elliptic integral K diverges at modulus {0}")]
    Divergence(f64),

    /// Load ratio w >= 1: the stable and saddle fixed points have merged.
    #[error("no locked-in regime exists at load ratio w = {0} (requires w < 1)")]
    NoLockedRegime(f64),

    /// The requested quantity only exists on the skipping side; the state is locked in.
    #[error("state is locked in: {0}")]
    LockedIn(&'static str),

    /// Weak-dissipation lock-in region is empty at this load.
    #[error("load {load} N leaves no locked-in window (threshold {threshold} N)")]
    NoLockIn { load: f64, threshold: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle a transition")]
    Bracket { lo: f64, hi: f64 },

    #[error("no root of {what} in [{lo}, {hi}]")]
    NoRoot {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    /// Adaptive step control collapsed; the trajectory up to the failure is kept.
    #[error("integration failed at t = {t}: step size underflow")]
    StepUnderflow { t: f64, partial: Box<Trajectory> },

    #[error("trajectory too short for averaging: {0}")]
    InsufficientData(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("missing parameter(s): {}", .0.join(", "))]
    MissingParameters(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
