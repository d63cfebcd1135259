//! Grid evaluation behind the figure commands. Cells are independent and are
//! collected in grid order, so output does not depend on the worker count.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::casimir_pfa::{skip_velocity_scan, PfaInputs, SkipVelocityRow, Spacing};
use crate::conservative::{conservative_regime, loaded_skipping_threshold, skipping_threshold};
use crate::dissipative::{
    pinion_velocity_overdamped, pinion_velocity_weak, stall_load_strong, stall_load_weak,
};
use crate::error::{Error, Result};
use crate::regime::RegimeLabel;
use crate::simulator::{
    find_boundary, simulate_point, BoundaryOptions, PinionSystem, SimulationOptions,
};

/// Damping ratio from which the overdamped closed form is used.
pub const STRONG_DAMPING: f64 = 10.0;
/// Damping ratio below which the weak-dissipation energy balance applies.
pub const WEAK_DAMPING: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellMethod {
    Analytic,
    Simulated,
}

impl CellMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CellMethod::Analytic => "analytic",
            CellMethod::Simulated => "simulated",
        }
    }
}

/// How velocities are obtained where both a closed form and simulation exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Closed form for ε = 0 and ε ≥ [`STRONG_DAMPING`], simulation otherwise.
    #[default]
    Auto,
    /// Closed forms only, including the weak-dissipation balance for ε < 1.
    Analytic,
    Simulated,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(EvalMode::Auto),
            "analytic" => Ok(EvalMode::Analytic),
            "simulated" => Ok(EvalMode::Simulated),
            other => Err(Error::Config {
                line: 0,
                message: format!("unknown mode `{other}`, expected auto, analytic or simulated"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, n: usize) -> Self {
        Axis {
            name: name.to_string(),
            min,
            max,
            n,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(
                "n",
                self.n as f64,
                "an axis needs at least 2 points",
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(Error::domain(
                "axis max",
                self.max,
                "axis range must be finite and increasing",
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        crate::casimir_pfa::grid(self.min, self.max, self.n, Spacing::Linear)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub coords: Vec<f64>,
    /// `None` when the cell failed.
    pub label: Option<RegimeLabel>,
    pub vp_over_vs: Option<f64>,
    pub method: CellMethod,
    pub failure: Option<String>,
}

impl Cell {
    fn from_result(coords: Vec<f64>, method: CellMethod, r: Result<(RegimeLabel, f64)>) -> Self {
        match r {
            Ok((label, vp)) => Cell {
                coords,
                label: Some(label),
                vp_over_vs: Some(vp),
                method,
                failure: None,
            },
            Err(e) => Cell {
                coords,
                label: None,
                vp_over_vs: None,
                method,
                failure: Some(e.to_string()),
            },
        }
    }

    fn regime_str(&self) -> &'static str {
        self.label.map_or("failed", RegimeLabel::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub u0: f64,
    pub drive: Option<f64>,
    pub method: CellMethod,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub command: String,
    pub axes: Vec<Axis>,
    pub fixed: Vec<(String, f64)>,
    pub tolerances: Vec<(String, f64)>,
    pub cells: Vec<Cell>,
    pub boundary: Option<Vec<BoundaryPoint>>,
    /// Derived scalars such as the stall load.
    pub derived: Vec<(String, f64)>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.failure.is_some()).count()
    }
}

/// Maps `f` over `items` on up to `workers` threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], workers: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if workers != Some(1) {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = workers {
                builder = builder.num_threads(n);
            }
            if let Ok(pool) = builder.build() {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Closed-form regime and `V_P/V_S`, or `None` where `mode` asks for simulation.
fn analytic_point(
    u0: f64,
    epsilon: f64,
    w: f64,
    drive: f64,
    mode: EvalMode,
) -> Option<Result<(RegimeLabel, f64)>> {
    if mode == EvalMode::Simulated {
        return None;
    }
    if epsilon == 0.0 {
        return Some(conservative_regime(u0, drive, w));
    }
    if epsilon >= STRONG_DAMPING {
        return Some(pinion_velocity_overdamped(drive, epsilon, w).map(|vp| {
            let locked = epsilon * drive + w <= 1.0;
            (
                if locked {
                    RegimeLabel::LockedIn
                } else {
                    RegimeLabel::skipping(vp)
                },
                vp,
            )
        }));
    }
    if mode == EvalMode::Analytic {
        if epsilon < WEAK_DAMPING {
            return Some(pinion_velocity_weak(drive, epsilon, w).map(|vp| {
                let locked = drive + w / epsilon <= 4.0 / PI;
                (
                    if locked {
                        RegimeLabel::LockedIn
                    } else {
                        RegimeLabel::skipping(vp)
                    },
                    vp,
                )
            }));
        }
        return Some(Err(Error::domain(
            "epsilon",
            epsilon,
            "no closed form between weak and strong dissipation",
        )));
    }
    None
}

fn simulated_point(
    u0: f64,
    epsilon: f64,
    w: f64,
    drive: f64,
    opts: &SimulationOptions,
) -> Result<(RegimeLabel, f64)> {
    let system = PinionSystem::new(epsilon, w, drive)?;
    let r = simulate_point(&system, u0, system.rest_start_velocity(), opts)?;
    Ok((r.label, r.vp_over_vs))
}

/// Regime and `V_P/V_S` of one rest-start point, by closed form where `mode`
/// allows it and by simulation otherwise.
pub fn evaluate_point(
    u0: f64,
    epsilon: f64,
    w: f64,
    drive: f64,
    mode: EvalMode,
    opts: &SimulationOptions,
) -> Cell {
    point(u0, epsilon, w, drive, mode, opts, vec![drive])
}

fn point(
    u0: f64,
    epsilon: f64,
    w: f64,
    drive: f64,
    mode: EvalMode,
    opts: &SimulationOptions,
    coords: Vec<f64>,
) -> Cell {
    match analytic_point(u0, epsilon, w, drive, mode) {
        Some(r) => Cell::from_result(coords, CellMethod::Analytic, r),
        None => Cell::from_result(
            coords,
            CellMethod::Simulated,
            simulated_point(u0, epsilon, w, drive, opts),
        ),
    }
}

fn simulation_tolerances(opts: &SimulationOptions) -> Vec<(String, f64)> {
    vec![
        ("integrator_tol".into(), opts.tol),
        ("min_periods".into(), opts.min_periods as f64),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramSpec {
    pub epsilon: f64,
    pub load_ratio: f64,
    pub u0: Axis,
    pub drive: Axis,
    pub boundary: bool,
    pub boundary_tol: f64,
    pub simulation: SimulationOptions,
}

impl PhaseDiagramSpec {
    pub fn new(epsilon: f64, load_ratio: f64, n_u0: usize, n_drive: usize) -> Self {
        PhaseDiagramSpec {
            epsilon,
            load_ratio,
            u0: Axis::new("u0", -PI, PI, n_u0),
            drive: Axis::new("V_R_over_V_S", 0.0, 3.0, n_drive),
            boundary: false,
            boundary_tol: 1e-4,
            simulation: SimulationOptions {
                tol: 1e-8,
                ..SimulationOptions::default()
            },
        }
    }
}

/// Regime over the `(u0, V_R/V_S)` plane for a pinion released at rest.
/// Frictionless cells are classified in closed form, damped cells by simulation.
pub fn phase_diagram(spec: &PhaseDiagramSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.u0.check()?;
    spec.drive.check()?;
    PinionSystem::new(spec.epsilon, spec.load_ratio, 0.0)?;
    if spec.drive.min < 0.0 {
        return Err(Error::domain(
            "V_R/V_S",
            spec.drive.min,
            "must be non-negative",
        ));
    }
    let mode = if spec.epsilon == 0.0 {
        EvalMode::Auto
    } else {
        EvalMode::Simulated
    };
    let grid: Vec<(f64, f64)> = spec
        .u0
        .values()
        .into_iter()
        .flat_map(|u| spec.drive.values().into_iter().map(move |d| (u, d)))
        .collect();
    let cells = par_map(&grid, workers, |&(u0, drive)| {
        point(
            u0,
            spec.epsilon,
            spec.load_ratio,
            drive,
            mode,
            &spec.simulation,
            vec![u0, drive],
        )
    });

    let boundary = spec.boundary.then(|| {
        let u0s = spec.u0.values();
        par_map(&u0s, workers, |&u0| boundary_point(spec, u0))
    });
    let mut tolerances = simulation_tolerances(&spec.simulation);
    tolerances.push(("boundary_tol".into(), spec.boundary_tol));
    Ok(SweepResult {
        command: "phase-diagram".into(),
        axes: vec![spec.u0.clone(), spec.drive.clone()],
        fixed: vec![
            ("epsilon".into(), spec.epsilon),
            ("w".into(), spec.load_ratio),
        ],
        tolerances,
        cells,
        boundary,
        derived: Vec::new(),
    })
}

fn boundary_point(spec: &PhaseDiagramSpec, u0: f64) -> BoundaryPoint {
    let (method, found) = if spec.epsilon == 0.0 {
        let b = if spec.load_ratio == 0.0 {
            Ok(skipping_threshold(u0))
        } else {
            loaded_skipping_threshold(u0, spec.load_ratio)
        };
        (CellMethod::Analytic, b)
    } else {
        let opts = BoundaryOptions {
            simulation: spec.simulation,
            tol: spec.boundary_tol,
        };
        let b = find_boundary(
            u0,
            spec.epsilon,
            spec.load_ratio,
            (spec.drive.min, spec.drive.max),
            &opts,
        );
        (CellMethod::Simulated, b)
    };
    match found {
        Ok(d) => BoundaryPoint {
            u0,
            drive: Some(d),
            method,
            failure: None,
        },
        Err(e) => BoundaryPoint {
            u0,
            drive: None,
            method,
            failure: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VpCurveSpec {
    pub u0: f64,
    pub epsilon: f64,
    pub load_ratio: f64,
    pub drive: Axis,
    pub mode: EvalMode,
    pub simulation: SimulationOptions,
}

impl VpCurveSpec {
    pub fn new(u0: f64, epsilon: f64, load_ratio: f64, n: usize) -> Self {
        VpCurveSpec {
            u0,
            epsilon,
            load_ratio,
            drive: Axis::new("V_R_over_V_S", 0.0, 5.0, n),
            mode: EvalMode::Auto,
            simulation: SimulationOptions::default(),
        }
    }
}

/// Average pinion velocity against rack velocity.
pub fn vp_curve(spec: &VpCurveSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.drive.check()?;
    PinionSystem::new(spec.epsilon, spec.load_ratio, spec.drive.min.max(0.0))?;
    if spec.drive.min < 0.0 {
        return Err(Error::domain(
            "V_R/V_S",
            spec.drive.min,
            "must be non-negative",
        ));
    }
    let drives = spec.drive.values();
    let cells = par_map(&drives, workers, |&d| {
        point(
            spec.u0,
            spec.epsilon,
            spec.load_ratio,
            d,
            spec.mode,
            &spec.simulation,
            vec![d],
        )
    });
    Ok(SweepResult {
        command: "vp-curve".into(),
        axes: vec![spec.drive.clone()],
        fixed: vec![
            ("u0".into(), spec.u0),
            ("epsilon".into(), spec.epsilon),
            ("w".into(), spec.load_ratio),
        ],
        tolerances: simulation_tolerances(&spec.simulation),
        cells,
        boundary: None,
        derived: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceVelocitySpec {
    pub drive: f64,
    pub epsilon: f64,
    /// Release mismatch for simulated cells.
    pub u0: f64,
    pub load: Axis,
    pub mode: EvalMode,
    pub simulation: SimulationOptions,
}

impl ForceVelocitySpec {
    pub fn new(drive: f64, epsilon: f64, n: usize) -> Self {
        ForceVelocitySpec {
            drive,
            epsilon,
            u0: 0.9 * PI,
            load: Axis::new("W_over_F", 0.0, 0.2, n),
            mode: EvalMode::Auto,
            simulation: SimulationOptions::default(),
        }
    }
}

/// Average pinion velocity against load, with the stall load where it is known.
///
/// In `Auto` mode weak damping (ε < 1) uses the energy balance, which
/// describes the skipping branch reached once the load is switched on.
pub fn force_velocity(spec: &ForceVelocitySpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.load.check()?;
    PinionSystem::new(spec.epsilon, spec.load.min, spec.drive)?;
    if spec.epsilon == 0.0 {
        return Err(Error::domain(
            "epsilon",
            0.0,
            "a loaded frictionless pinion has no steady velocity",
        ));
    }
    let mode = match spec.mode {
        EvalMode::Auto if spec.epsilon < WEAK_DAMPING => EvalMode::Analytic,
        m => m,
    };
    let loads = spec.load.values();
    let cells = par_map(&loads, workers, |&w| {
        point(
            spec.u0,
            spec.epsilon,
            w,
            spec.drive,
            mode,
            &spec.simulation,
            vec![w],
        )
    });

    let mut derived = Vec::new();
    let closed = if spec.epsilon < WEAK_DAMPING {
        Some(stall_load_weak(spec.drive, spec.epsilon))
    } else if spec.epsilon >= STRONG_DAMPING {
        Some(stall_load_strong(spec.drive, spec.epsilon))
    } else {
        None
    };
    match closed {
        Some(Ok(ws)) => derived.push(("stall_W_over_F".to_string(), ws)),
        Some(Err(e)) => log::info!("no closed-form stall load: {e}"),
        None => {}
    }
    if let Some(ws) = interpolated_stall(&cells) {
        derived.push(("stall_W_over_F_from_grid".to_string(), ws));
    }
    Ok(SweepResult {
        command: "force-velocity".into(),
        axes: vec![spec.load.clone()],
        fixed: vec![
            ("V_R_over_V_S".into(), spec.drive),
            ("epsilon".into(), spec.epsilon),
            ("u0".into(), spec.u0),
        ],
        tolerances: simulation_tolerances(&spec.simulation),
        cells,
        boundary: None,
        derived,
    })
}

/// Load at which the sampled velocity first changes sign, by linear interpolation.
fn interpolated_stall(cells: &[Cell]) -> Option<f64> {
    cells.windows(2).find_map(|pair| {
        let (a, b) = (&pair[0], &pair[1]);
        let (va, vb) = (a.vp_over_vs?, b.vp_over_vs?);
        (va > 0.0 && vb <= 0.0 && vb.is_finite())
            .then(|| a.coords[0] + (b.coords[0] - a.coords[0]) * va / (va - vb))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipVelocitySpec {
    pub base: PfaInputs,
    pub gap_range: (f64, f64),
    pub n: usize,
    pub spacing: Spacing,
}

pub fn skip_velocity(spec: &SkipVelocitySpec) -> Result<Vec<SkipVelocityRow>> {
    skip_velocity_scan(&spec.base, spec.gap_range, spec.n, spec.spacing)
}

fn write_meta<W: Write>(out: &mut W, command: &str, lines: &[(String, String)]) -> Result<()> {
    writeln!(out, "# rackpinion {} {command}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in lines {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(())
}

fn result_meta(r: &SweepResult) -> Vec<(String, String)> {
    let mut lines = Vec::new();
    for a in &r.axes {
        lines.push((
            format!("axis {}", a.name),
            format!("{} .. {} ({} points)", a.min, a.max, a.n),
        ));
    }
    for (k, v) in r.fixed.iter().chain(&r.derived) {
        lines.push((k.clone(), fmt_num(*v)));
    }
    for (k, v) in &r.tolerances {
        lines.push((k.clone(), format!("{v:e}")));
    }
    for c in r.cells.iter().filter(|c| c.failure.is_some()) {
        lines.push((
            format!("failed at {:?}", c.coords),
            c.failure.clone().unwrap_or_default(),
        ));
    }
    lines
}

/// Shortest round-trip form, switching to an exponent for very small or large magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_num)
}

/// Writes a sweep as CSV behind a `#` metadata block. Column layout follows
/// the command that produced it.
pub fn write_sweep_csv<W: Write>(r: &SweepResult, out: &mut W) -> Result<()> {
    write_meta(out, &r.command, &result_meta(r))?;
    let mut csv = csv::Writer::from_writer(out);
    match r.command.as_str() {
        "phase-diagram" => {
            csv.write_record(["u0", "V_R_over_V_S", "regime", "V_P_over_V_S", "method"])?;
            for c in &r.cells {
                csv.write_record([
                    fmt_num(c.coords[0]),
                    fmt_num(c.coords[1]),
                    c.regime_str().to_string(),
                    fmt_opt(c.vp_over_vs),
                    c.method.as_str().to_string(),
                ])?;
            }
        }
        "vp-curve" => {
            csv.write_record(["V_R_over_V_S", "V_P_over_V_S", "regime", "method"])?;
            for c in &r.cells {
                csv.write_record([
                    fmt_num(c.coords[0]),
                    fmt_opt(c.vp_over_vs),
                    c.regime_str().to_string(),
                    c.method.as_str().to_string(),
                ])?;
            }
        }
        "force-velocity" => {
            csv.write_record(["W_over_F", "V_P_over_V_S", "stalled"])?;
            for c in &r.cells {
                let stalled = c
                    .vp_over_vs
                    .map_or(String::new(), |v| (v <= 0.0).to_string());
                csv.write_record([fmt_num(c.coords[0]), fmt_opt(c.vp_over_vs), stalled])?;
            }
        }
        other => {
            return Err(Error::InsufficientData(format!(
                "no CSV layout for `{other}`"
            )));
        }
    }
    csv.flush()?;
    Ok(())
}

/// Boundary polyline as `u0,V_R_over_V_S,method` rows.
pub fn write_boundary_csv<W: Write>(r: &SweepResult, out: &mut W) -> Result<()> {
    let points = r.boundary.as_deref().unwrap_or_default();
    let mut meta = vec![("epsilon_w".to_string(), format!("{:?}", r.fixed))];
    for p in points.iter().filter(|p| p.failure.is_some()) {
        meta.push((
            format!("failed at u0 = {}", p.u0),
            p.failure.clone().unwrap_or_default(),
        ));
    }
    write_meta(out, "phase-diagram boundary", &meta)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["u0", "V_R_over_V_S", "method"])?;
    for p in points {
        csv.write_record([
            fmt_num(p.u0),
            fmt_opt(p.drive),
            p.method.as_str().to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_skip_velocity_csv<W: Write>(
    spec: &SkipVelocitySpec,
    rows: &[SkipVelocityRow],
    out: &mut W,
) -> Result<()> {
    let b = &spec.base;
    let meta = vec![
        ("lambda_m".to_string(), format!("{:e}", b.wavelength)),
        ("a1_m".to_string(), format!("{:e}", b.amplitude_pinion)),
        ("a2_m".to_string(), format!("{:e}", b.amplitude_rack)),
        ("L_m".to_string(), format!("{:e}", b.length)),
        ("R_m".to_string(), format!("{:e}", b.radius)),
        ("rho_kg_per_m3".to_string(), b.density.to_string()),
        ("spacing".to_string(), format!("{:?}", spec.spacing)),
        (
            "model".to_string(),
            crate::casimir_pfa::PERFECT_METAL_NOTE.to_string(),
        ),
    ];
    write_meta(out, "skip-velocity", &meta)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["H_m", "V_S_m_per_s", "omega_rad_per_s"])?;
    for r in rows {
        csv.write_record([
            format!("{:e}", r.gap),
            format!("{:e}", r.skipping_velocity),
            format!("{:e}", r.angular_velocity),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frictionless_diagram_is_symmetric_and_analytic() {
        let spec = PhaseDiagramSpec::new(0.0, 0.0, 21, 31);
        let r = phase_diagram(&spec, Some(1)).unwrap();
        assert_eq!(r.cells.len(), 21 * 31);
        assert!(r.cells.iter().all(|c| c.method == CellMethod::Analytic));
        for i in 0..21 {
            for j in 0..31 {
                let a = &r.cells[i * 31 + j];
                let b = &r.cells[(20 - i) * 31 + j];
                assert_eq!(
                    a.label.map(|l| l.is_skipping()),
                    b.label.map(|l| l.is_skipping())
                );
            }
        }
    }

    #[test]
    fn analytic_boundary_polyline() {
        let mut spec = PhaseDiagramSpec::new(0.0, 0.0, 9, 3);
        spec.boundary = true;
        let r = phase_diagram(&spec, None).unwrap();
        for p in r.boundary.unwrap() {
            assert_relative_eq!(
                p.drive.unwrap(),
                (2.0 * (1.0 + p.u0.cos())).sqrt(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut spec = PhaseDiagramSpec::new(0.05, 0.0, 3, 3);
        spec.u0 = Axis::new("u0", 0.7 * PI, 0.9 * PI, 3);
        spec.drive = Axis::new("V_R_over_V_S", 1.0, 2.0, 3);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_sweep_csv(&phase_diagram(&spec, Some(1)).unwrap(), &mut a).unwrap();
        write_sweep_csv(&phase_diagram(&spec, Some(3)).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vp_curve_columns_and_lock_segment() {
        let spec = VpCurveSpec::new(PI / 4.0, 0.0, 0.0, 11);
        let r = vp_curve(&spec, None).unwrap();
        let mut out = Vec::new();
        write_sweep_csv(&r, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "V_R_over_V_S,V_P_over_V_S,regime,method");
        let threshold = (2.0 + 2f64.sqrt()).sqrt();
        for c in &r.cells {
            if c.coords[0] < threshold {
                assert_eq!(c.vp_over_vs.unwrap(), c.coords[0]);
            } else {
                assert!(c.vp_over_vs.unwrap() < c.coords[0]);
            }
        }
    }

    #[test]
    fn force_velocity_stall_matches_closed_form() {
        let spec = ForceVelocitySpec::new(2.0 * 4.0 / PI, 0.05, 41);
        let r = force_velocity(&spec, None).unwrap();
        let exact = r
            .derived
            .iter()
            .find(|(k, _)| k == "stall_W_over_F")
            .unwrap()
            .1;
        let grid = r
            .derived
            .iter()
            .find(|(k, _)| k == "stall_W_over_F_from_grid")
            .unwrap()
            .1;
        assert_relative_eq!(exact, stall_load_weak(spec.drive, 0.05).unwrap());
        assert!((exact - grid).abs() < 5e-3);
        let v: Vec<f64> = r.cells.iter().map(|c| c.vp_over_vs.unwrap()).collect();
        assert!(v.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn bad_axes_are_rejected() {
        let mut spec = VpCurveSpec::new(0.0, 0.0, 0.0, 1);
        assert!(vp_curve(&spec, None).is_err());
        spec.drive = Axis::new("V_R_over_V_S", 2.0, 1.0, 5);
        assert!(vp_curve(&spec, None).is_err());
    }
}
