use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    hermite_state, integrate, IntegrateOptions, IntegratorStats, PinionSystem, Trajectory,
};
use crate::conservative::{
    classify_conservative, oscillation_period, rotation_period, EnergyClass,
};
use crate::error::{Error, Result};
use crate::regime::RegimeLabel;
use crate::roots::bisect_predicate;

/// Leading fraction of a run discarded before averaging.
pub const TRANSIENT_FRACTION: f64 = 0.2;
/// Whole periods required in the averaging window.
pub const MIN_AVERAGING_PERIODS: usize = 200;
/// A phase that varies by less than this over the last half of the window has
/// come to rest on a fixed point.
const SETTLED_RANGE: f64 = 1e-6;
const CONVERGENCE_RELATIVE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Motion {
    /// The phase advances by whole turns.
    Winding,
    /// Bounded oscillation about a well.
    Oscillating,
    /// Relaxed onto a fixed point.
    Settled,
}

/// Time average of the phase velocity over whole periods of the motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanVelocity {
    pub phase_velocity: f64,
    /// Whole windings or oscillations spanned by the average.
    pub periods: usize,
    pub motion: Motion,
    pub window: (f64, f64),
}

fn refine<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    let g_lo = g(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn averaging_window(traj: &Trajectory) -> (f64, f64) {
    let t0 = traj.start().t;
    let t1 = traj.end().t;
    (t0 + TRANSIENT_FRACTION * (t1 - t0), t1)
}

/// Samples strictly inside `(ta, tb)` bracketed by the interpolated endpoints.
fn window_states(traj: &Trajectory, ta: f64, tb: f64) -> Option<Vec<super::PhaseState>> {
    let first = traj.state_at(ta)?;
    let last = traj.state_at(tb)?;
    let lo = traj.samples.partition_point(|s| s.t <= ta);
    let hi = traj.samples.partition_point(|s| s.t < tb);
    let mut states = Vec::with_capacity(hi.saturating_sub(lo) + 2);
    states.push(first);
    states.extend_from_slice(&traj.samples[lo..hi]);
    states.push(last);
    Some(states)
}

fn window_mean(traj: &Trajectory, ta: f64, tb: f64) -> Result<MeanVelocity> {
    let states = window_states(traj, ta, tb).ok_or_else(|| {
        Error::InsufficientData(format!("window [{ta}, {tb}] outside trajectory"))
    })?;
    let system = &traj.system;
    let first = states[0];
    let last = *states.last().expect("window holds its endpoints");
    let du = last.u - first.u;
    let span = tb - ta;
    if !(span > 0.0) {
        return Err(Error::InsufficientData("empty averaging window".into()));
    }

    let half = states.partition_point(|s| s.t < ta + 0.5 * span);
    let (lo_u, hi_u) = states[half..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.u), hi.max(s.u))
        });
    if hi_u - lo_u < SETTLED_RANGE {
        return Ok(MeanVelocity {
            phase_velocity: du / span,
            periods: 0,
            motion: Motion::Settled,
            window: (ta, tb),
        });
    }

    if du.abs() >= 2.0 * PI {
        let sign = du.signum();
        let turns = (du.abs() / (2.0 * PI)).floor();
        let level = first.u + sign * 2.0 * PI * turns;
        // last sample still short of the target level
        let j = states
            .iter()
            .rposition(|s| (s.u - level) * sign < 0.0)
            .expect("the window starts short of the target level");
        let (a, b) = (states[j], states[j + 1]);
        let t_cross = refine(|t| hermite_state(system, &a, &b, t).u - level, a.t, b.t);
        return Ok(MeanVelocity {
            phase_velocity: sign * 2.0 * PI * turns / (t_cross - ta),
            periods: turns as usize,
            motion: Motion::Winding,
            window: (ta, tb),
        });
    }

    let mut crossings = Vec::new();
    for pair in states.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.v < 0.0 && b.v >= 0.0 {
            crossings.push(refine(|t| hermite_state(system, &a, &b, t).v, a.t, b.t));
        }
    }
    if crossings.len() >= 2 {
        let t_first = crossings[0];
        let t_last = *crossings.last().expect("at least two crossings");
        let u_first = traj.state_at(t_first).map_or(first.u, |s| s.u);
        let u_last = traj.state_at(t_last).map_or(last.u, |s| s.u);
        return Ok(MeanVelocity {
            phase_velocity: (u_last - u_first) / (t_last - t_first),
            periods: crossings.len() - 1,
            motion: Motion::Oscillating,
            window: (ta, tb),
        });
    }
    Ok(MeanVelocity {
        phase_velocity: du / span,
        periods: 0,
        motion: Motion::Oscillating,
        window: (ta, tb),
    })
}

/// Whole-period average of `v` over the last 80% of the trajectory.
pub fn mean_phase_velocity(traj: &Trajectory) -> Result<MeanVelocity> {
    let (ta, tb) = averaging_window(traj);
    let mean = window_mean(traj, ta, tb)?;
    if mean.motion != Motion::Settled && mean.periods < MIN_AVERAGING_PERIODS {
        return Err(Error::InsufficientData(format!(
            "{} whole periods after the transient, need {MIN_AVERAGING_PERIODS}",
            mean.periods
        )));
    }
    Ok(mean)
}

/// Jerk-averaged pinion velocity `V_R + V_S⟨v⟩`.
pub fn average_pinion_velocity(
    traj: &Trajectory,
    rack_velocity: f64,
    skipping_velocity: f64,
) -> Result<f64> {
    Ok(rack_velocity + skipping_velocity * mean_phase_velocity(traj)?.phase_velocity)
}

/// Mean spacing of successive velocity minima-to-maxima crossings (`v` rising
/// through zero) over the whole trajectory.
pub fn measure_oscillation_period(traj: &Trajectory) -> Option<f64> {
    let system = &traj.system;
    let mut first = None;
    let mut last = None;
    let mut count = 0usize;
    for pair in traj.samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.v < 0.0 && b.v >= 0.0 {
            let t = refine(|t| hermite_state(system, &a, &b, t).v, a.t, b.t);
            first.get_or_insert(t);
            last = Some(t);
            count += 1;
        }
    }
    match (first, last) {
        (Some(a), Some(b)) if count >= 2 => Some((b - a) / (count - 1) as f64),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub label: RegimeLabel,
    /// Average pinion velocity, in the units of the velocities passed in.
    pub pinion_velocity: f64,
    /// Average pinion velocity over the first and second halves of the window.
    pub half_velocities: (f64, f64),
    pub periods: usize,
    pub note: Option<String>,
}

fn winds(traj: &Trajectory, ta: f64, tb: f64) -> bool {
    match (traj.state_at(ta), traj.state_at(tb)) {
        (Some(a), Some(b)) => (b.u - a.u).abs() >= 2.0 * PI,
        _ => false,
    }
}

fn half_means(traj: &Trajectory) -> Result<(MeanVelocity, MeanVelocity)> {
    let (ta, tb) = averaging_window(traj);
    let mid = 0.5 * (ta + tb);
    Ok((window_mean(traj, ta, mid)?, window_mean(traj, mid, tb)?))
}

/// Classifies the post-transient motion of a trajectory.
pub fn detect_regime(
    traj: &Trajectory,
    rack_velocity: f64,
    skipping_velocity: f64,
) -> Result<RegimeReport> {
    if traj.stats.stopped_early {
        let du = traj.end().u - traj.start().u;
        let vp = rack_velocity + skipping_velocity * du / traj.duration();
        return Ok(RegimeReport {
            label: RegimeLabel::skipping(vp / skipping_velocity),
            pinion_velocity: vp,
            half_velocities: (vp, vp),
            periods: 0,
            note: Some("stopped at the excursion limit; velocity is not a steady average".into()),
        });
    }
    let mean = mean_phase_velocity(traj)?;
    let (ta, tb) = averaging_window(traj);
    let mid = 0.5 * (ta + tb);
    let (first, second) = half_means(traj)?;
    let halves = (
        rack_velocity + skipping_velocity * first.phase_velocity,
        rack_velocity + skipping_velocity * second.phase_velocity,
    );
    let vp = rack_velocity + skipping_velocity * mean.phase_velocity;
    let label = match (winds(traj, ta, mid), winds(traj, mid, tb)) {
        (true, true) => RegimeLabel::skipping(vp / skipping_velocity),
        (false, false) => RegimeLabel::LockedIn,
        _ => RegimeLabel::Separatrix,
    };
    let note = (label == RegimeLabel::Separatrix).then(|| {
        format!(
            "motion changes between window halves; candidate velocities {} and {}",
            halves.0, halves.1
        )
    });
    Ok(RegimeReport {
        label,
        pinion_velocity: vp,
        half_velocities: halves,
        periods: mean.periods,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    pub tol: f64,
    pub min_periods: usize,
    /// Number of times a run may be doubled while the average settles.
    pub max_doublings: u32,
    /// Overrides the automatic initial run length.
    pub base_duration: Option<f64>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            tol: 1e-9,
            min_periods: MIN_AVERAGING_PERIODS,
            max_doublings: 3,
            base_duration: None,
        }
    }
}

/// Outcome of [`simulate_point`], with velocities in units of V_S.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub label: RegimeLabel,
    pub vp_over_vs: f64,
    pub half_velocities: (f64, f64),
    pub periods: usize,
    pub motion: Motion,
    pub duration: f64,
    /// The halves of the window agreed to relative 1e−3.
    pub converged: bool,
    pub stats: IntegratorStats,
    pub note: Option<String>,
}

/// Rough period of the post-transient motion, used to size the first run.
fn period_estimate(system: &PinionSystem, u0: f64, v0: f64) -> f64 {
    let (eps, w, drive) = (system.epsilon, system.load_ratio, system.drive);
    if eps == 0.0 {
        let h = 0.5 * v0 * v0 + 1.0 - u0.cos();
        let period = match classify_conservative(h) {
            EnergyClass::Oscillation => oscillation_period(h.max(1e-12)).ok(),
            EnergyClass::Rotation => rotation_period(h).ok(),
            EnergyClass::Separatrix => None,
        };
        return period.unwrap_or(100.0).min(100.0);
    }
    if eps >= 1.0 {
        let c = eps * drive + w;
        return if c > 1.05 {
            2.0 * PI * eps / (c * c - 1.0).sqrt()
        } else {
            2.0 * PI
        };
    }
    2.0 * PI / (drive + w.abs() / eps).max(1.0)
}

fn initial_duration(system: &PinionSystem, u0: f64, v0: f64, opts: &SimulationOptions) -> f64 {
    if let Some(d) = opts.base_duration {
        return d;
    }
    let period = period_estimate(system, u0, v0);
    let periods = (opts.min_periods + 10) as f64;
    let relaxation = if system.epsilon > 0.0 {
        30.0 * (2.0 / system.epsilon).max(system.epsilon)
    } else {
        0.0
    };
    (periods * period / (1.0 - TRANSIENT_FRACTION))
        .max(relaxation)
        .max(100.0)
}

fn escape_options(system: &PinionSystem, opts: &SimulationOptions) -> IntegrateOptions {
    let mut integ = IntegrateOptions::new(opts.base_duration.unwrap_or(600.0), opts.tol);
    // Leaving the 2π-wide well by a further turn is irreversible without friction.
    integ.max_excursion = Some(4.0 * PI + 2.0 * PI * system.load_ratio.abs().min(1.0));
    integ
}

/// Simulates a pinion from `(u0, v0)`, extending the run until the whole-period
/// average is steady, and classifies the result.
pub fn simulate_point(
    system: &PinionSystem,
    u0: f64,
    v0: f64,
    opts: &SimulationOptions,
) -> Result<PointResult> {
    if system.is_conservative() && system.load_ratio != 0.0 {
        let traj = integrate(system, u0, v0, &escape_options(system, opts))?;
        if traj.stats.stopped_early {
            let sign = (traj.end().u - traj.start().u).signum();
            let vp = sign * f64::INFINITY;
            return Ok(PointResult {
                label: RegimeLabel::skipping(vp),
                vp_over_vs: vp,
                half_velocities: (vp, vp),
                periods: 0,
                motion: Motion::Winding,
                duration: traj.duration(),
                converged: true,
                stats: traj.stats,
                note: Some("load accelerates the frictionless pinion without bound".into()),
            });
        }
        let (ta, tb) = averaging_window(&traj);
        let mean = window_mean(&traj, ta, tb)?;
        let vp = system.drive + mean.phase_velocity;
        return Ok(PointResult {
            label: RegimeLabel::LockedIn,
            vp_over_vs: vp,
            half_velocities: (vp, vp),
            periods: mean.periods,
            motion: mean.motion,
            duration: traj.duration(),
            converged: true,
            stats: traj.stats,
            note: None,
        });
    }

    let duration = initial_duration(system, u0, v0, opts);
    let integ = IntegrateOptions::new(duration, opts.tol);
    let mut traj = integrate(system, u0, v0, &integ)?;
    let mut doublings = 0;
    loop {
        let (ta, tb) = averaging_window(&traj);
        let mean = window_mean(&traj, ta, tb)?;
        let (first, second) = half_means(&traj)?;
        let mid = 0.5 * (ta + tb);
        let agree = winds(&traj, ta, mid) == winds(&traj, mid, tb);
        let scale = first.phase_velocity.abs().max(second.phase_velocity.abs());
        let converged = agree
            && (first.phase_velocity - second.phase_velocity).abs()
                <= CONVERGENCE_RELATIVE * scale + 1e-9;
        let enough = mean.motion == Motion::Settled || mean.periods >= opts.min_periods;
        if (enough && converged) || doublings >= opts.max_doublings {
            if !enough {
                return Err(Error::InsufficientData(format!(
                    "{} whole periods after {} time units, need {}",
                    mean.periods,
                    traj.duration(),
                    opts.min_periods
                )));
            }
            let report = detect_regime_with(&traj, mean, first, second);
            if !converged {
                log::debug!(
                    "average not converged at u0 = {u0}, drive = {}: halves {:?}",
                    system.drive,
                    report.half_velocities
                );
            }
            return Ok(PointResult {
                label: report.label,
                vp_over_vs: report.pinion_velocity,
                half_velocities: report.half_velocities,
                periods: mean.periods,
                motion: mean.motion,
                duration: traj.duration(),
                converged,
                stats: traj.stats,
                note: report.note,
            });
        }
        let extra = traj.duration();
        traj.extend(extra, &integ)?;
        doublings += 1;
    }
}

fn detect_regime_with(
    traj: &Trajectory,
    mean: MeanVelocity,
    first: MeanVelocity,
    second: MeanVelocity,
) -> RegimeReport {
    let drive = traj.system.drive;
    let (ta, tb) = averaging_window(traj);
    let mid = 0.5 * (ta + tb);
    let vp = drive + mean.phase_velocity;
    let halves = (drive + first.phase_velocity, drive + second.phase_velocity);
    let label = match (winds(traj, ta, mid), winds(traj, mid, tb)) {
        (true, true) => RegimeLabel::skipping(vp),
        (false, false) => RegimeLabel::LockedIn,
        _ => RegimeLabel::Separatrix,
    };
    let note = (label == RegimeLabel::Separatrix).then(|| {
        format!(
            "motion changes between window halves; candidate V_P/V_S {} and {}",
            halves.0, halves.1
        )
    });
    RegimeReport {
        label,
        pinion_velocity: vp,
        half_velocities: halves,
        periods: mean.periods,
        note,
    }
}

/// Regime of a pinion started at `(u0, v0)`, found by simulation.
pub fn classify_by_simulation(
    system: &PinionSystem,
    u0: f64,
    v0: f64,
    opts: &SimulationOptions,
) -> Result<RegimeLabel> {
    Ok(simulate_point(system, u0, v0, opts)?.label)
}

/// Whether a pinion released at rest ends up skipping teeth.
fn skips(system: &PinionSystem, u0: f64, opts: &SimulationOptions) -> Result<bool> {
    let v0 = system.rest_start_velocity();
    if system.is_conservative() {
        let traj = integrate(system, u0, v0, &escape_options(system, opts))?;
        return Ok(traj.stats.stopped_early);
    }
    Ok(simulate_point(system, u0, v0, opts)?.label != RegimeLabel::LockedIn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    pub simulation: SimulationOptions,
    /// Absolute tolerance on V_R/V_S.
    pub tol: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            simulation: SimulationOptions {
                tol: 1e-8,
                ..SimulationOptions::default()
            },
            tol: 1e-4,
        }
    }
}

/// Rack velocity (units of V_S) at which a pinion released at rest with
/// mismatch `u0` starts to skip, bisected inside `bracket`.
pub fn find_boundary(
    u0: f64,
    epsilon: f64,
    w: f64,
    bracket: (f64, f64),
    opts: &BoundaryOptions,
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Bracket { lo, hi });
    }
    bisect_predicate(
        |drive| skips(&PinionSystem::new(epsilon, w, drive)?, u0, &opts.simulation),
        lo,
        hi,
        opts.tol,
    )
}
