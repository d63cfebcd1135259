use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rackpinion::casimir_pfa::{PfaInputs, Spacing, GOLD_PLASMA_WAVELENGTH};
use rackpinion::dissipative::{stall_load_strong, stall_load_weak};
use rackpinion::simulator::{
    integrate, simulate_point, write_trajectory_csv, write_trajectory_metadata, IntegrateOptions,
    PinionSystem, SimulationOptions,
};
use rackpinion::sweep::{
    evaluate_point, force_velocity, phase_diagram, skip_velocity, vp_curve, write_boundary_csv,
    write_skip_velocity_csv, write_sweep_csv, Axis, EvalMode, ForceVelocitySpec, PhaseDiagramSpec,
    SkipVelocitySpec, SweepResult, VpCurveSpec, STRONG_DAMPING, WEAK_DAMPING,
};
use rackpinion::units::{DeviceConfig, DimensionlessParams};
use rackpinion::Error;
use serde::Serialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rackpinion",
    version,
    about = "Casimir rack-and-pinion dynamics: figures as data, single-point queries"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Device description in `key = value [unit]` form.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    json: bool,
    /// Integrator tolerance for simulated points.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Grid size, `<n1>x<n2>` or `<n>` for one-axis sweeps.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args, Clone, Copy)]
struct Reduced {
    /// Damping ratio ε = √(F_D/F).
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Load ratio w = W/F.
    #[arg(long, default_value_t = 0.0)]
    w: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Analytic,
    Simulated,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => EvalMode::Auto,
            Mode::Analytic => EvalMode::Analytic,
            Mode::Simulated => EvalMode::Simulated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Log,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV plus a JSON sidecar.
    Simulate {
        #[command(flatten)]
        reduced: Reduced,
        /// Initial phase mismatch (rad).
        #[arg(long, default_value_t = 0.0)]
        u0: f64,
        /// Rack velocity V_R/V_S.
        #[arg(long)]
        vr: Option<f64>,
        /// Initial phase velocity; a pinion at rest when omitted.
        #[arg(long)]
        v0: Option<f64>,
        /// Run length in units of T.
        #[arg(long, default_value_t = 200.0)]
        duration: f64,
        /// Output sampling interval; every integrator step when omitted.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Regime over the (u0, V_R/V_S) plane.
    PhaseDiagram {
        #[command(flatten)]
        reduced: Reduced,
        #[arg(long, default_value_t = -PI, allow_hyphen_values = true)]
        u0_min: f64,
        #[arg(long, default_value_t = PI)]
        u0_max: f64,
        #[arg(long, default_value_t = 0.0)]
        vr_min: f64,
        #[arg(long, default_value_t = 3.0)]
        vr_max: f64,
        /// Also write the skipping boundary next to `--out`.
        #[arg(long)]
        boundary: bool,
    },
    /// Pinion velocity against rack velocity.
    VpCurve {
        #[command(flatten)]
        reduced: Reduced,
        #[arg(long, default_value_t = PI / 4.0, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 0.0)]
        vr_min: f64,
        #[arg(long, default_value_t = 5.0)]
        vr_max: f64,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Pinion velocity against load at fixed rack velocity.
    ForceVelocity {
        #[arg(long)]
        vr: f64,
        #[arg(long)]
        epsilon: f64,
        /// Release mismatch for simulated points.
        #[arg(long, default_value_t = 0.9 * PI, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 0.0)]
        w_min: f64,
        /// Upper load; twice the closed-form stall load (capped at 1) when omitted.
        #[arg(long)]
        w_max: Option<f64>,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Skipping velocity against gap for a gold pinion (geometry from `--config` if given).
    SkipVelocity {
        #[arg(long, default_value_t = 20e-9)]
        h_min: f64,
        #[arg(long, default_value_t = 1e-6)]
        h_max: f64,
        #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
        spacing: SpacingArg,
    },
    /// Time scales, reduced parameters, regime and stall force for one device.
    Query {
        /// Initial phase mismatch (rad).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u0: f64,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| {
        p.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not a grid size such as 100x80"))
    };
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => Ok((parse(s)?, 1)),
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. }
            | Error::MissingParameters(_)
            | Error::Domain { .. }
            | Error::Io(_) => Failure::Config(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn load_config(path: &Path) -> CliResult<DeviceConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let config: DeviceConfig = text
        .parse()
        .map_err(|e: Error| Failure::Config(format!("{}: {e}", path.display())))?;
    for advisory in config.device.validate()? {
        log::warn!("{advisory}");
    }
    Ok(config)
}

fn device_params(common: &Common) -> CliResult<Option<DimensionlessParams>> {
    match &common.config {
        Some(path) => Ok(Some(load_config(path)?.nondimensionalize()?)),
        None => Ok(None),
    }
}

fn output(common: &Common) -> CliResult<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulation_options(common: &Common, base: SimulationOptions) -> CliResult<SimulationOptions> {
    match common.tol {
        Some(tol) if tol.is_nan() || tol <= 0.0 => Err(Failure::Config(format!(
            "--tol must be positive, got {tol}"
        ))),
        Some(tol) => Ok(SimulationOptions { tol, ..base }),
        None => Ok(base),
    }
}

fn one_axis(common: &Common, default: usize) -> CliResult<usize> {
    match common.grid {
        None => Ok(default),
        Some((n, 1)) => Ok(n),
        Some((n1, n2)) => Err(Failure::Config(format!(
            "this command sweeps one axis; --grid {n1}x{n2} has two"
        ))),
    }
}

fn emit_sweep(common: &Common, result: &SweepResult) -> CliResult {
    let mut out = output(common)?;
    if common.json {
        serde_json::to_writer_pretty(&mut out, result)?;
        writeln!(out)?;
    } else {
        write_sweep_csv(result, &mut out)?;
    }
    out.flush()?;
    let failed = result.failures();
    if failed > 0 {
        log::warn!(
            "{failed} of {} cells failed; reasons are listed in the header",
            result.cells.len()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let common = &cli.common;
    match cli.command {
        Command::Simulate {
            reduced,
            u0,
            vr,
            v0,
            duration,
            dt,
        } => simulate(common, reduced, u0, vr, v0, duration, dt),
        Command::PhaseDiagram {
            reduced,
            u0_min,
            u0_max,
            vr_min,
            vr_max,
            boundary,
        } => {
            let (epsilon, w) = reduced_or_device(common, reduced)?;
            let default = if epsilon == 0.0 {
                (200, 200)
            } else {
                (100, 100)
            };
            let (n1, n2) = common.grid.unwrap_or(default);
            let mut spec = PhaseDiagramSpec::new(epsilon, w, n1, n2);
            spec.u0 = Axis::new("u0", u0_min, u0_max, n1);
            spec.drive = Axis::new("V_R_over_V_S", vr_min, vr_max, n2);
            spec.boundary = boundary;
            spec.simulation = simulation_options(common, spec.simulation)?;
            let boundary_path = match (&common.out, boundary) {
                (Some(p), true) => Some(p.with_extension("boundary.csv")),
                (None, true) => return Err(Failure::Config("--boundary needs --out".into())),
                _ => None,
            };
            let result = phase_diagram(&spec, common.workers)?;
            emit_sweep(common, &result)?;
            if let Some(path) = boundary_path {
                let mut f = BufWriter::new(File::create(&path)?);
                write_boundary_csv(&result, &mut f)?;
                f.flush()?;
                eprintln!("boundary written to {}", path.display());
            }
            Ok(())
        }
        Command::VpCurve {
            reduced,
            u0,
            vr_min,
            vr_max,
            mode,
        } => {
            let (epsilon, w) = reduced_or_device(common, reduced)?;
            let mut spec = VpCurveSpec::new(u0, epsilon, w, one_axis(common, 200)?);
            spec.drive = Axis::new("V_R_over_V_S", vr_min, vr_max, spec.drive.n);
            spec.mode = mode.into();
            spec.simulation = simulation_options(common, spec.simulation)?;
            emit_sweep(common, &vp_curve(&spec, common.workers)?)
        }
        Command::ForceVelocity {
            vr,
            epsilon,
            u0,
            w_min,
            w_max,
            mode,
        } => {
            let mut spec = ForceVelocitySpec::new(vr, epsilon, one_axis(common, 101)?);
            spec.u0 = u0;
            let w_max = match w_max {
                Some(w) => w,
                None => default_load_range(vr, epsilon),
            };
            spec.load = Axis::new("W_over_F", w_min, w_max, spec.load.n);
            spec.mode = mode.into();
            spec.simulation = simulation_options(common, spec.simulation)?;
            let result = force_velocity(&spec, common.workers)?;
            for (k, v) in &result.derived {
                eprintln!("{k} = {v}");
            }
            emit_sweep(common, &result)
        }
        Command::SkipVelocity {
            h_min,
            h_max,
            spacing,
        } => {
            let base = match &common.config {
                Some(path) => load_config(path)?.device.pfa_inputs(),
                None => PfaInputs {
                    gap: h_min,
                    wavelength: 500e-9,
                    amplitude_pinion: 10e-9,
                    amplitude_rack: 10e-9,
                    length: 1e-6,
                    radius: 1e-6,
                    density: 19300.0,
                },
            };
            let spec = SkipVelocitySpec {
                base,
                gap_range: (h_min, h_max),
                n: one_axis(common, 100)?,
                spacing: match spacing {
                    SpacingArg::Log => Spacing::Log,
                    SpacingArg::Linear => Spacing::Linear,
                },
            };
            if h_min < GOLD_PLASMA_WAVELENGTH {
                log::warn!("gaps below {GOLD_PLASMA_WAVELENGTH:e} m are under the plasma wavelength; perfect-metal values overestimate V_S there");
            }
            let rows = skip_velocity(&spec)?;
            let mut out = output(common)?;
            if common.json {
                serde_json::to_writer_pretty(&mut out, &rows)?;
                writeln!(out)?;
            } else {
                write_skip_velocity_csv(&spec, &rows, &mut out)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Query { u0 } => query(common, u0),
    }
}

fn default_load_range(vr: f64, epsilon: f64) -> f64 {
    let stall = if epsilon < WEAK_DAMPING {
        stall_load_weak(vr, epsilon).ok()
    } else if epsilon >= STRONG_DAMPING {
        stall_load_strong(vr, epsilon).ok()
    } else {
        None
    };
    stall.map_or(1.0, |ws| (2.0 * ws).min(1.0))
}

/// Reduced parameters from the flags, replaced by the device's when `--config` is given.
fn reduced_or_device(common: &Common, reduced: Reduced) -> CliResult<(f64, f64)> {
    Ok(match device_params(common)? {
        Some(p) => (p.epsilon, p.load_ratio),
        None => (reduced.epsilon, reduced.w),
    })
}

#[derive(Serialize)]
struct SimulationSummary {
    regime: String,
    vp_over_vs: f64,
    converged: bool,
    periods: usize,
    trajectory: Option<PathBuf>,
    note: Option<String>,
}

fn simulate(
    common: &Common,
    reduced: Reduced,
    u0: f64,
    vr: Option<f64>,
    v0: Option<f64>,
    duration: f64,
    dt: Option<f64>,
) -> CliResult {
    let (epsilon, w, drive, start_v) = match device_params(common)? {
        Some(p) => (p.epsilon, p.load_ratio, p.rack_ratio, Some(p.v0)),
        None => (reduced.epsilon, reduced.w, vr.unwrap_or(1.0), None),
    };
    let system = PinionSystem::new(epsilon, w, drive)?;
    let v0 = v0
        .or(start_v)
        .unwrap_or_else(|| system.rest_start_velocity());
    let tol = common.tol.unwrap_or(1e-9);

    let mut opts = IntegrateOptions::new(duration, tol);
    opts.output_interval = dt;
    let traj = integrate(&system, u0, v0, &opts)?;
    let path = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    let mut csv = BufWriter::new(File::create(&path)?);
    write_trajectory_csv(&traj, &mut csv)?;
    csv.flush()?;
    let mut meta = BufWriter::new(File::create(path.with_extension("json"))?);
    write_trajectory_metadata(&traj, &mut meta)?;
    meta.flush()?;

    let point = simulate_point(
        &system,
        u0,
        v0,
        &simulation_options(common, SimulationOptions::default())?,
    )?;
    let summary = SimulationSummary {
        regime: point.label.to_string(),
        vp_over_vs: point.vp_over_vs,
        converged: point.converged,
        periods: point.periods,
        trajectory: Some(path),
        note: point.note,
    };
    if common.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!("regime={} V_P/V_S={}", summary.regime, summary.vp_over_vs);
    }
    Ok(())
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct QueryReport {
    T_s: f64,
    V_S_m_per_s: f64,
    epsilon: f64,
    w: f64,
    V_R_over_V_S: f64,
    F_N: f64,
    F_D_N: f64,
    I_kg_m2: f64,
    regime: String,
    V_P_over_V_S: Option<f64>,
    V_P_m_per_s: Option<f64>,
    method: String,
    stall_force_N: Option<f64>,
    advisories: Vec<String>,
    note: Option<String>,
}

fn query(common: &Common, u0: f64) -> CliResult {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("query needs --config".into()))?;
    let config = load_config(path)?;
    let p = config.nondimensionalize()?;
    let advisories = config.device.validate()?;
    let opts = simulation_options(common, SimulationOptions::default())?;

    let rest = p.v0 == -p.rack_ratio;
    let (regime, vp, method, mut note) = if rest {
        let cell = evaluate_point(
            u0,
            p.epsilon,
            p.load_ratio,
            p.rack_ratio,
            EvalMode::Auto,
            &opts,
        );
        match cell.label {
            Some(label) => (
                label.to_string(),
                cell.vp_over_vs,
                cell.method.as_str().to_string(),
                None,
            ),
            None => (
                "failed".to_string(),
                None,
                cell.method.as_str().to_string(),
                cell.failure,
            ),
        }
    } else {
        let system = PinionSystem::new(p.epsilon, p.load_ratio, p.rack_ratio)?;
        let r = simulate_point(&system, u0, p.v0, &opts)?;
        (
            r.label.to_string(),
            Some(r.vp_over_vs),
            "simulated".to_string(),
            r.note,
        )
    };
    let (regime, note_w) = if p.load_ratio.abs() >= 1.0 {
        (
            "NoLockedRegime".to_string(),
            Some(format!("load {regime}: |W| >= F leaves no locked state")),
        )
    } else {
        (regime, None)
    };
    note = note.or(note_w);
    let stall = if p.epsilon == 0.0 {
        None
    } else if p.epsilon < WEAK_DAMPING {
        stall_load_weak(p.rack_ratio, p.epsilon).ok()
    } else if p.epsilon >= STRONG_DAMPING {
        stall_load_strong(p.rack_ratio, p.epsilon).ok()
    } else {
        None
    };
    let report = QueryReport {
        T_s: p.time_scale,
        V_S_m_per_s: p.skipping_velocity,
        epsilon: p.epsilon,
        w: p.load_ratio,
        V_R_over_V_S: p.rack_ratio,
        F_N: p.force_amplitude,
        F_D_N: p.dissipation_force,
        I_kg_m2: p.moment_of_inertia,
        regime,
        V_P_over_V_S: vp,
        V_P_m_per_s: vp.map(|v| v * p.skipping_velocity),
        method,
        stall_force_N: stall.map(|ws| ws * p.force_amplitude),
        advisories,
        note,
    };
    let mut out = output(common)?;
    if common.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:e}"));
        writeln!(out, "T          = {:e} s", report.T_s)?;
        writeln!(out, "V_S        = {:e} m/s", report.V_S_m_per_s)?;
        writeln!(out, "epsilon    = {}", report.epsilon)?;
        writeln!(out, "w          = {}", report.w)?;
        writeln!(out, "V_R/V_S    = {}", report.V_R_over_V_S)?;
        writeln!(out, "F          = {:e} N", report.F_N)?;
        writeln!(out, "F_D        = {:e} N", report.F_D_N)?;
        writeln!(out, "regime     = {}", report.regime)?;
        writeln!(
            out,
            "V_P/V_S    = {} ({})",
            opt(report.V_P_over_V_S),
            report.method
        )?;
        writeln!(out, "V_P        = {} m/s", opt(report.V_P_m_per_s))?;
        writeln!(out, "stall W    = {} N", opt(report.stall_force_N))?;
        for a in &report.advisories {
            writeln!(out, "advisory: {a}")?;
        }
        if let Some(n) = &report.note {
            writeln!(out, "note: {n}")?;
        }
    }
    out.flush()?;
    Ok(())
}
