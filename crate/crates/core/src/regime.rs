use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Transduction behaviour of the rack and pinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    /// Pinion teeth stay in registry with the rack: V_P = V_R.
    LockedIn,
    /// Skipping teeth with positive average pinion velocity.
    SkipForward,
    /// Skipping with negative average pinion velocity (reverse gear).
    SkipReverse,
    /// On or numerically indistinguishable from the separatrix.
    Separatrix,
    /// Skipping with vanishing average pinion velocity.
    Stalled,
}

/// |V_P| below this fraction of V_S in a skipping state counts as stalled.
pub const STALL_FRACTION: f64 = 1e-3;

impl RegimeLabel {
    /// Label for a skipping state with average pinion velocity `vp_over_vs`.
    pub fn skipping(vp_over_vs: f64) -> Self {
        if vp_over_vs.abs() < STALL_FRACTION {
            RegimeLabel::Stalled
        } else if vp_over_vs > 0.0 {
            RegimeLabel::SkipForward
        } else {
            RegimeLabel::SkipReverse
        }
    }

    pub fn is_skipping(self) -> bool {
        matches!(
            self,
            RegimeLabel::SkipForward | RegimeLabel::SkipReverse | RegimeLabel::Stalled
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::LockedIn => "LockedIn",
            RegimeLabel::SkipForward => "SkipForward",
            RegimeLabel::SkipReverse => "SkipReverse",
            RegimeLabel::Separatrix => "Separatrix",
            RegimeLabel::Stalled => "Stalled",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "LockedIn" => RegimeLabel::LockedIn,
            "SkipForward" => RegimeLabel::SkipForward,
            "SkipReverse" => RegimeLabel::SkipReverse,
            "Separatrix" => RegimeLabel::Separatrix,
            "Stalled" => RegimeLabel::Stalled,
            other => return Err(format!("unknown regime `{other}`")),
        })
    }
}
