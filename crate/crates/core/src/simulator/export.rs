use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{IntegratorStats, PinionSystem, Trajectory};
use crate::error::Result;

/// Sidecar describing how a trajectory file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub system: PinionSystem,
    pub u0: f64,
    pub v0: f64,
    pub tol: f64,
    pub duration: f64,
    pub samples: usize,
    pub stats: IntegratorStats,
}

impl From<&Trajectory> for TrajectoryMetadata {
    fn from(traj: &Trajectory) -> Self {
        TrajectoryMetadata {
            system: traj.system,
            u0: traj.u0,
            v0: traj.v0,
            tol: traj.tol,
            duration: traj.duration(),
            samples: traj.samples.len(),
            stats: traj.stats,
        }
    }
}

/// Writes `t,u,v,u_wrapped` rows behind a `#` metadata block.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: &mut W) -> Result<()> {
    let s = &traj.system;
    writeln!(out, "# epsilon = {}", s.epsilon)?;
    writeln!(out, "# w = {}", s.load_ratio)?;
    writeln!(out, "# V_R/V_S = {}", s.drive)?;
    writeln!(out, "# u0 = {}", traj.u0)?;
    writeln!(out, "# v0 = {}", traj.v0)?;
    writeln!(out, "# tol = {:e}", traj.tol)?;
    writeln!(out, "t,u,v,u_wrapped")?;
    for p in &traj.samples {
        writeln!(out, "{},{},{},{}", p.t, p.u, p.v, p.u_wrapped())?;
    }
    Ok(())
}

pub fn write_trajectory_metadata<W: Write>(traj: &Trajectory, out: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, &TrajectoryMetadata::from(traj))?;
    writeln!(out)?;
    Ok(())
}
