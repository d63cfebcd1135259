//! Browser entry points. Each returns a JSON string so the page needs no
//! generated type glue beyond `wasm-bindgen` itself.

use rackpinion::casimir_pfa::{skip_velocity_scan, PfaInputs, Spacing};
use rackpinion::simulator::{integrate, IntegrateOptions, PinionSystem};
use rackpinion::sweep::{vp_curve, Axis, VpCurveSpec};
use rackpinion::Result;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 400;
const MAX_SAMPLES: usize = 20_000;

#[derive(Serialize)]
struct Curve {
    x: Vec<f64>,
    y: Vec<Option<f64>>,
    regime: Vec<String>,
    method: Vec<String>,
}

pub fn vp_curve_json(u0: f64, epsilon: f64, w: f64, vr_max: f64, n: usize) -> Result<String> {
    let mut spec = VpCurveSpec::new(u0, epsilon, w, n.clamp(2, MAX_POINTS));
    spec.drive = Axis::new("V_R_over_V_S", 0.0, vr_max, spec.drive.n);
    let r = vp_curve(&spec, Some(1))?;
    let curve = Curve {
        x: r.cells.iter().map(|c| c.coords[0]).collect(),
        // ±∞ (runaway under load) has no JSON form
        y: r.cells
            .iter()
            .map(|c| c.vp_over_vs.filter(|v| v.is_finite()))
            .collect(),
        regime: r
            .cells
            .iter()
            .map(|c| c.label.map_or("failed".into(), |l| l.to_string()))
            .collect(),
        method: r
            .cells
            .iter()
            .map(|c| c.method.as_str().to_string())
            .collect(),
    };
    Ok(serde_json::to_string(&curve)?)
}

#[derive(Serialize)]
struct Path {
    t: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

pub fn trajectory_json(epsilon: f64, w: f64, vr: f64, u0: f64, duration: f64) -> Result<String> {
    let system = PinionSystem::new(epsilon, w, vr)?;
    let mut opts = IntegrateOptions::new(duration, 1e-8);
    opts.output_interval = Some((duration / MAX_SAMPLES as f64).max(0.02));
    let traj = integrate(&system, u0, system.rest_start_velocity(), &opts)?;
    let path = Path {
        t: traj.samples.iter().map(|s| s.t).collect(),
        u: traj.samples.iter().map(|s| s.u).collect(),
        v: traj.samples.iter().map(|s| s.v).collect(),
    };
    Ok(serde_json::to_string(&path)?)
}

#[derive(Serialize)]
struct Scan {
    gap: Vec<f64>,
    omega: Vec<f64>,
}

/// Gold pinion with 10 nm corrugations; lengths in metres.
pub fn skip_velocity_json(
    radius: f64,
    wavelength: f64,
    h_min: f64,
    h_max: f64,
    n: usize,
) -> Result<String> {
    let base = PfaInputs {
        gap: h_min,
        wavelength,
        amplitude_pinion: 10e-9,
        amplitude_rack: 10e-9,
        length: radius,
        radius,
        density: 19300.0,
    };
    let rows = skip_velocity_scan(&base, (h_min, h_max), n.clamp(2, MAX_POINTS), Spacing::Log)?;
    let scan = Scan {
        gap: rows.iter().map(|r| r.gap).collect(),
        omega: rows.iter().map(|r| r.angular_velocity).collect(),
    };
    Ok(serde_json::to_string(&scan)?)
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = vpCurve)]
pub fn vp_curve_js(
    u0: f64,
    epsilon: f64,
    w: f64,
    vr_max: f64,
    n: usize,
) -> std::result::Result<String, JsError> {
    js(vp_curve_json(u0, epsilon, w, vr_max, n))
}

#[wasm_bindgen(js_name = trajectory)]
pub fn trajectory_js(
    epsilon: f64,
    w: f64,
    vr: f64,
    u0: f64,
    duration: f64,
) -> std::result::Result<String, JsError> {
    js(trajectory_json(epsilon, w, vr, u0, duration))
}

#[wasm_bindgen(js_name = skipVelocity)]
pub fn skip_velocity_js(
    radius: f64,
    wavelength: f64,
    h_min: f64,
    h_max: f64,
    n: usize,
) -> std::result::Result<String, JsError> {
    js(skip_velocity_json(radius, wavelength, h_min, h_max, n))
}
