//! Direct integration of the dimensionless pinion equation
//!
//! ```text
//! u̇ = v,    v̇ = −sin u − ε (v + V_R/V_S) − w
//! ```
//!
//! and the analyses built on it: whole-period averaging of the pinion
//! velocity, regime detection, and numerical location of the skipping
//! boundary. Every analytic result in the crate is checked against this.

mod analysis;
mod export;
mod rk;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rk::State;

pub use analysis::{
    average_pinion_velocity, classify_by_simulation, detect_regime, find_boundary,
    mean_phase_velocity, measure_oscillation_period, simulate_point, BoundaryOptions, MeanVelocity,
    Motion, PointResult, RegimeReport, SimulationOptions, MIN_AVERAGING_PERIODS,
    TRANSIENT_FRACTION,
};
pub use export::{write_trajectory_csv, write_trajectory_metadata, TrajectoryMetadata};

/// Parameters of the reduced equation of motion.
///
/// Friction acts on the absolute pinion velocity `ẋ = V_R + V_S·v`, so its
/// reference point in the rack frame is `v = −drive`, which is also the
/// initial phase velocity of a pinion released at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinionSystem {
    /// ε = Tζ/I.
    pub epsilon: f64,
    /// w = W/F.
    pub load_ratio: f64,
    /// V_R/V_S.
    pub drive: f64,
}

impl PinionSystem {
    pub fn new(epsilon: f64, load_ratio: f64, drive: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::domain(
                "epsilon",
                epsilon,
                "must be finite and non-negative",
            ));
        }
        if !load_ratio.is_finite() {
            return Err(Error::domain("w", load_ratio, "must be finite"));
        }
        if !(drive >= 0.0) || !drive.is_finite() {
            return Err(Error::domain(
                "V_R/V_S",
                drive,
                "must be finite and non-negative",
            ));
        }
        Ok(PinionSystem {
            epsilon,
            load_ratio,
            drive,
        })
    }

    /// Initial phase velocity of a pinion released at rest.
    pub fn rest_start_velocity(&self) -> f64 {
        -self.drive
    }

    pub fn is_conservative(&self) -> bool {
        self.epsilon == 0.0
    }

    #[inline]
    pub fn acceleration(&self, u: f64, v: f64) -> f64 {
        -u.sin() - self.epsilon * (v + self.drive) - self.load_ratio
    }

    /// Time derivative of the acceleration along the flow.
    #[inline]
    pub fn jerk(&self, u: f64, v: f64) -> f64 {
        -u.cos() * v - self.epsilon * self.acceleration(u, v)
    }

    #[inline]
    fn rhs(&self, y: &State) -> State {
        [y[1], self.acceleration(y[0], y[1])]
    }
}

/// A point on the trajectory, in units of T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    /// Unwrapped phase mismatch, so windings accumulate.
    pub u: f64,
    pub v: f64,
}

impl PhaseState {
    /// Phase reduced to (−π, π].
    pub fn u_wrapped(&self) -> f64 {
        let r = self.u.rem_euclid(2.0 * PI);
        if r > PI {
            r - 2.0 * PI
        } else {
            r
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive Dormand–Prince 5(4); each step's local error is at most `tol·min(h, 1)`.
    DormandPrince,
    /// Classical RK4 at a fixed step.
    Rk4 { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub duration: f64,
    pub tol: f64,
    /// Resample onto a uniform grid; `None` records every accepted step.
    pub output_interval: Option<f64>,
    pub method: Method,
    /// Stop once `|u − u₀|` exceeds this value.
    pub max_excursion: Option<f64>,
}

impl IntegrateOptions {
    pub fn new(duration: f64, tol: f64) -> Self {
        IntegrateOptions {
            duration,
            tol,
            output_interval: None,
            method: Method::DormandPrince,
            max_excursion: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
    /// Largest accepted local error estimate, relative to its allowance.
    pub max_error_ratio: f64,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub system: PinionSystem,
    pub u0: f64,
    pub v0: f64,
    pub tol: f64,
    pub samples: Vec<PhaseState>,
    pub stats: IntegratorStats,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEP: f64 = 0.5;

/// Integrates the pinion equation from `(u0, v0)` at `t = 0`.
pub fn integrate(
    system: &PinionSystem,
    u0: f64,
    v0: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(opts.duration > 0.0) || !opts.duration.is_finite() {
        return Err(Error::domain("duration", opts.duration, "must be positive"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tol", opts.tol, "must be positive"));
    }
    if let Some(dt) = opts.output_interval {
        if !(dt > 0.0) {
            return Err(Error::domain("output_interval", dt, "must be positive"));
        }
    }
    if !u0.is_finite() || !v0.is_finite() {
        return Err(Error::domain("initial state", u0 + v0, "must be finite"));
    }
    let mut traj = Trajectory {
        system: *system,
        u0,
        v0,
        tol: opts.tol,
        samples: vec![PhaseState {
            t: 0.0,
            u: u0,
            v: v0,
        }],
        stats: IntegratorStats::default(),
    };
    traj.advance(opts.duration, opts)?;
    Ok(traj)
}

impl Trajectory {
    pub fn start(&self) -> &PhaseState {
        &self.samples[0]
    }

    pub fn end(&self) -> &PhaseState {
        self.samples
            .last()
            .expect("trajectory always holds its initial state")
    }

    pub fn duration(&self) -> f64 {
        self.end().t - self.start().t
    }

    /// Continues the integration by `extra` time units from the last sample.
    pub fn extend(&mut self, extra: f64, opts: &IntegrateOptions) -> Result<()> {
        self.stats.stopped_early = false;
        self.advance(extra, opts)
    }

    fn advance(&mut self, extra: f64, opts: &IntegrateOptions) -> Result<()> {
        match opts.method {
            Method::DormandPrince => self.advance_adaptive(extra, opts),
            Method::Rk4 { step } => self.advance_fixed(extra, step, opts),
        }
    }

    fn excursion_exceeded(&self, u: f64, opts: &IntegrateOptions) -> bool {
        opts.max_excursion
            .is_some_and(|limit| (u - self.u0).abs() > limit)
    }

    fn push_step(
        &mut self,
        from: PhaseState,
        to: PhaseState,
        next_output: &mut f64,
        opts: &IntegrateOptions,
    ) {
        match opts.output_interval {
            None => self.samples.push(to),
            Some(dt) => {
                while *next_output <= to.t + 1e-12 * dt {
                    let t = next_output.min(to.t);
                    let state = if t >= to.t {
                        to
                    } else {
                        hermite_state(&self.system, &from, &to, t)
                    };
                    self.samples.push(state);
                    *next_output += dt;
                }
            }
        }
    }

    fn advance_adaptive(&mut self, extra: f64, opts: &IntegrateOptions) -> Result<()> {
        let system = self.system;
        let f = |y: &State| system.rhs(y);
        let last = *self.end();
        let t_end = last.t + extra;
        let mut t = last.t;
        let mut y: State = [last.u, last.v];
        let mut k1 = f(&y);
        self.stats.rhs_evaluations += 1;
        let mut h = (0.1 * opts.tol.powf(0.2)).clamp(1e-6, MAX_STEP).min(extra);
        let mut next_output = opts.output_interval.map_or(f64::INFINITY, |dt| last.t + dt);
        let mut from = last;

        while t < t_end {
            let remaining = t_end - t;
            let mut step = h.min(remaining);
            let last_step = step >= remaining;
            if last_step {
                step = remaining;
            }
            if step < 1e-13 * t.abs().max(1.0) {
                self.stats.stopped_early = true;
                return Err(Error::StepUnderflow {
                    t,
                    partial: Box::new(self.clone()),
                });
            }
            let (y_new, k7, err) = rk::dopri_step(&f, &y, &k1, step);
            self.stats.rhs_evaluations += 6;
            // error per unit step: global error then scales with tol over long runs
            let ratio = err[0].abs().max(err[1].abs()) / (opts.tol * step.min(1.0));
            if ratio <= 1.0 && y_new.iter().all(|x| x.is_finite()) {
                t = if last_step { t_end } else { t + step };
                y = y_new;
                k1 = k7;
                self.stats.accepted_steps += 1;
                self.stats.max_error_ratio = self.stats.max_error_ratio.max(ratio);
                let to = PhaseState {
                    t,
                    u: y[0],
                    v: y[1],
                };
                self.push_step(from, to, &mut next_output, opts);
                from = to;
                let factor = if ratio == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * ratio.powf(-0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                h = (step * factor).min(MAX_STEP);
                if self.excursion_exceeded(y[0], opts) {
                    self.stats.stopped_early = true;
                    break;
                }
            } else {
                self.stats.rejected_steps += 1;
                let factor = if ratio.is_finite() {
                    (SAFETY * ratio.powf(-0.25)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = step * factor;
            }
        }
        if opts.output_interval.is_some() && self.end().t < from.t {
            self.samples.push(from);
        }
        Ok(())
    }

    fn advance_fixed(&mut self, extra: f64, step: f64, opts: &IntegrateOptions) -> Result<()> {
        if !(step > 0.0) {
            return Err(Error::domain("step", step, "must be positive"));
        }
        let system = self.system;
        let f = |y: &State| system.rhs(y);
        let last = *self.end();
        let n = (extra / step).ceil().max(1.0) as u64;
        let h = extra / n as f64;
        let mut y: State = [last.u, last.v];
        let mut next_output = opts.output_interval.map_or(f64::INFINITY, |dt| last.t + dt);
        let mut from = last;
        for i in 1..=n {
            y = rk::rk4_step(&f, &y, h);
            self.stats.rhs_evaluations += 4;
            self.stats.accepted_steps += 1;
            let to = PhaseState {
                t: last.t + i as f64 * h,
                u: y[0],
                v: y[1],
            };
            self.push_step(from, to, &mut next_output, opts);
            from = to;
            if self.excursion_exceeded(y[0], opts) {
                self.stats.stopped_early = true;
                break;
            }
        }
        if opts.output_interval.is_some() && self.end().t < from.t {
            self.samples.push(from);
        }
        Ok(())
    }

    /// Index `i` with `samples[i].t <= t <= samples[i + 1].t`.
    fn segment(&self, t: f64) -> Option<usize> {
        let n = self.samples.len();
        if n < 2 || t < self.samples[0].t || t > self.samples[n - 1].t {
            return None;
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        Some(i.clamp(1, n - 1) - 1)
    }

    /// State at time `t` by quintic Hermite interpolation between samples.
    pub fn state_at(&self, t: f64) -> Option<PhaseState> {
        let i = self.segment(t)?;
        Some(hermite_state(
            &self.system,
            &self.samples[i],
            &self.samples[i + 1],
            t,
        ))
    }

    /// Unloaded energy `½v² + 1 − cos u` at every sample.
    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples
            .iter()
            .map(|s| 0.5 * s.v * s.v + 1.0 - s.u.cos())
    }
}

/// Quintic Hermite basis on `[0, 1]`: weights for (y0, h·y0', h²·y0'', h²·y1'', h·y1', y1).
fn quintic(s: f64) -> [f64; 6] {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
    ]
}

pub(crate) fn hermite_state(
    system: &PinionSystem,
    a: &PhaseState,
    b: &PhaseState,
    t: f64,
) -> PhaseState {
    let h = b.t - a.t;
    if h <= 0.0 {
        return *a;
    }
    let s = ((t - a.t) / h).clamp(0.0, 1.0);
    let w = quintic(s);
    let acc_a = system.acceleration(a.u, a.v);
    let acc_b = system.acceleration(b.u, b.v);
    let jerk_a = system.jerk(a.u, a.v);
    let jerk_b = system.jerk(b.u, b.v);
    let h2 = h * h;
    let u = w[0] * a.u
        + w[1] * h * a.v
        + w[2] * h2 * acc_a
        + w[3] * h2 * acc_b
        + w[4] * h * b.v
        + w[5] * b.u;
    let v = w[0] * a.v
        + w[1] * h * acc_a
        + w[2] * h2 * jerk_a
        + w[3] * h2 * jerk_b
        + w[4] * h * acc_b
        + w[5] * b.v;
    PhaseState { t, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_point_stays_put() {
        let system = PinionSystem::new(0.0, 0.0, 0.0).unwrap();
        let traj = integrate(&system, 0.0, 0.0, &IntegrateOptions::new(100.0, 1e-10)).unwrap();
        assert!(traj.samples.iter().all(|s| s.u == 0.0 && s.v == 0.0));
        assert_relative_eq!(traj.end().t, 100.0);
    }

    #[test]
    fn times_strictly_increase_and_grid_spacing_holds() {
        let system = PinionSystem::new(0.1, 0.2, 1.0).unwrap();
        let mut opts = IntegrateOptions::new(50.0, 1e-9);
        opts.output_interval = Some(0.25);
        let traj = integrate(&system, 0.3, -1.0, &opts).unwrap();
        assert_eq!(traj.samples.len(), 201);
        for pair in traj.samples.windows(2) {
            assert!(pair[1].t > pair[0].t);
            assert!(pair[1].t - pair[0].t <= 0.25 + 1e-12);
        }
        let free = integrate(&system, 0.3, -1.0, &IntegrateOptions::new(50.0, 1e-9)).unwrap();
        let end = free.end();
        let resampled = traj.end();
        assert!((end.u - resampled.u).abs() < 1e-8);
    }

    #[test]
    fn small_oscillation_matches_harmonic_solution() {
        let system = PinionSystem::new(0.0, 0.0, 0.0).unwrap();
        let amplitude = 1e-4;
        let traj = integrate(&system, amplitude, 0.0, &IntegrateOptions::new(20.0, 1e-13)).unwrap();
        for s in traj.samples.iter().step_by(7) {
            assert!((s.u - amplitude * s.t.cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn hermite_interpolation_is_accurate_between_steps() {
        let system = PinionSystem::new(0.05, 0.0, 1.5).unwrap();
        let coarse = integrate(&system, 2.5, -1.5, &IntegrateOptions::new(30.0, 1e-8)).unwrap();
        let mut opts = IntegrateOptions::new(30.0, 1e-12);
        opts.output_interval = Some(0.1);
        let fine = integrate(&system, 2.5, -1.5, &opts).unwrap();
        for s in fine.samples.iter().skip(1).take(290) {
            let c = coarse.state_at(s.t).unwrap();
            assert!((c.u - s.u).abs() < 1e-6, "{} {}", c.u, s.u);
            assert!((c.v - s.v).abs() < 1e-6);
        }
    }

    #[test]
    fn rk4_agrees_with_adaptive() {
        let system = PinionSystem::new(0.2, 0.1, 0.8).unwrap();
        let a = integrate(&system, 1.0, -0.8, &IntegrateOptions::new(40.0, 1e-11)).unwrap();
        let mut opts = IntegrateOptions::new(40.0, 1e-11);
        opts.method = Method::Rk4 { step: 1e-3 };
        let b = integrate(&system, 1.0, -0.8, &opts).unwrap();
        assert!((a.end().u - b.end().u).abs() < 1e-9);
        assert!((a.end().v - b.end().v).abs() < 1e-9);
    }

    #[test]
    fn excursion_limit_stops_early() {
        let system = PinionSystem::new(0.0, 0.0, 5.0).unwrap();
        let mut opts = IntegrateOptions::new(1000.0, 1e-9);
        opts.max_excursion = Some(4.0 * PI);
        let traj = integrate(&system, 0.0, -5.0, &opts).unwrap();
        assert!(traj.stats.stopped_early);
        assert!(traj.end().t < 10.0);
    }

    #[test]
    fn wrapped_phase() {
        let s = PhaseState {
            t: 0.0,
            u: -7.0 * PI,
            v: 0.0,
        };
        assert_relative_eq!(s.u_wrapped(), PI, epsilon = 1e-12);
        let s = PhaseState {
            t: 0.0,
            u: 2.0 * PI + 0.5,
            v: 0.0,
        };
        assert_relative_eq!(s.u_wrapped(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_invalid_options() {
        let system = PinionSystem::new(0.0, 0.0, 0.0).unwrap();
        assert!(integrate(&system, 0.0, 0.0, &IntegrateOptions::new(0.0, 1e-9)).is_err());
        assert!(integrate(&system, 0.0, 0.0, &IntegrateOptions::new(1.0, 0.0)).is_err());
        assert!(PinionSystem::new(-1.0, 0.0, 0.0).is_err());
        assert!(PinionSystem::new(0.0, 0.0, -1.0).is_err());
    }
}
