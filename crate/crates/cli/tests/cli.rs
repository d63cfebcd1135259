use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rackpinion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A device with T = 1 s and V_S = 1 m/s, so SI velocities equal reduced ones.
fn unit_device(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("device.cfg");
    let text = format!(
        "# unit scales\nR = 1 m\nL = 1 m\nlambda = {} m\nrho = 1000 kg/m3\nF_override = 1 N\nI_override = 1 kg*m^2\n{extra}",
        2.0 * PI
    );
    fs::write(&path, text).unwrap();
    path
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn query_json(config: &Path, u0: &str) -> serde_json::Value {
    let o = run(&[
        "query",
        "--config",
        config.to_str().unwrap(),
        "--json",
        "--u0",
        u0,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn simulate_locked_in_reports_rack_velocity() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traj.csv");
    let o = run(&[
        "simulate",
        "--vr",
        "0.5",
        "--u0",
        "0.5",
        "--dt",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("regime=LockedIn V_P/V_S="), "{line}");
    let vp: f64 = line.trim().rsplit('=').next().unwrap().parse().unwrap();
    assert!((vp - 0.5).abs() < 1e-6);

    let csv = fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], ["t", "u", "v", "u_wrapped"]);
    assert_eq!(rows.len(), 1 + 801);
    assert!(csv.starts_with('#'));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["system"]["drive"], 0.5);
    assert!(meta["stats"]["accepted_steps"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_and_query_agree_on_skipping_velocity() {
    let dir = TempDir::new().unwrap();
    let config = unit_device(dir.path(), "V_R = 3 m/s\n");
    let out = dir.path().join("t.csv");
    let o = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--u0",
        "0.5",
        "--json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sim: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let q = query_json(&config, "0.5");
    assert_eq!(q["method"], "analytic");
    assert_eq!(q["regime"], "SkipForward");
    let (a, b) = (
        sim["vp_over_vs"].as_f64().unwrap(),
        q["V_P_over_V_S"].as_f64().unwrap(),
    );
    assert!((a - b).abs() < 1e-4 * b.abs(), "{a} vs {b}");
    assert!((q["T_s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((q["V_S_m_per_s"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn query_frictionless_locked_in() {
    let dir = TempDir::new().unwrap();
    let q = query_json(&unit_device(dir.path(), "V_R = 0.5 m/s\n"), "0");
    assert_eq!(q["regime"], "LockedIn");
    assert_eq!(q["V_P_over_V_S"], 0.5);
}

#[test]
fn query_overdamped_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    // ε = Tζ/I = 30 with T = I = 1
    let q = query_json(
        &unit_device(dir.path(), "zeta = 30 kg*m^2/s\nV_R = 0.1 m/s\n"),
        "0",
    );
    let (eps, vr) = (30.0f64, 0.1f64);
    let c = eps * vr;
    let exact = vr - (c * c - 1.0).sqrt() / eps;
    assert!((q["epsilon"].as_f64().unwrap() - eps).abs() < 1e-12);
    assert_eq!(q["method"], "analytic");
    assert!((q["V_P_over_V_S"].as_f64().unwrap() - exact).abs() < 1e-12);
    let stall = 1.0 / ((1.0 + c * c).sqrt() + c);
    assert!((q["stall_force_N"].as_f64().unwrap() - stall).abs() < 1e-12);
}

#[test]
fn query_full_load_has_no_locked_regime() {
    let dir = TempDir::new().unwrap();
    let q = query_json(&unit_device(dir.path(), "W = 1.5 N\nV_R = 0.5 m/s\n"), "0");
    assert_eq!(q["regime"], "NoLockedRegime");
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let bad = unit_device(dir.path(), "V_R = 1 m/s\nspeed = 3 m/s\n");
    let o = run(&["query", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));

    let missing = dir.path().join("missing.cfg");
    fs::write(&missing, "R = 1 um\nL = 1 um\n").unwrap();
    let o = run(&["query", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for key in ["lambda", "rho", "V_R"] {
        assert!(msg.contains(key), "{msg}");
    }

    assert_eq!(
        run(&["phase-diagram", "--grid", "ax3"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["vp-curve", "--grid", "10x10"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_code_3() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&[
        "simulate",
        "--vr",
        "0.5",
        "--tol",
        "1e-300",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn phase_diagram_is_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("pd{workers}.csv"));
        let o = run(&[
            "phase-diagram",
            "--epsilon",
            "0.05",
            "--grid",
            "4x4",
            "--u0-min",
            "2.0",
            "--u0-max",
            "3.0",
            "--vr-min",
            "1.0",
            "--vr-max",
            "1.6",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = data_rows(&String::from_utf8(outputs.remove(0)).unwrap());
    assert_eq!(
        rows[0],
        ["u0", "V_R_over_V_S", "regime", "V_P_over_V_S", "method"]
    );
    assert!(rows[1..].iter().all(|r| r[4] == "simulated"));
}

#[test]
fn frictionless_boundary_follows_threshold() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pd.csv");
    let o = run(&[
        "phase-diagram",
        "--grid",
        "21x5",
        "--boundary",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.with_extension("boundary.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], ["u0", "V_R_over_V_S", "method"]);
    for r in &rows[1..] {
        let u0: f64 = r[0].parse().unwrap();
        let b: f64 = r[1].parse().unwrap();
        assert!((b - (2.0 * (1.0 + u0.cos())).sqrt()).abs() < 1e-3);
    }
}

#[test]
fn vp_curve_reverse_gear() {
    let o = run(&[
        "vp-curve",
        "--u0",
        &(0.75 * PI).to_string(),
        "--grid",
        "60",
        "--vr-max",
        "6",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(
        rows[0],
        ["V_R_over_V_S", "V_P_over_V_S", "regime", "method"]
    );
    assert!(rows[1..]
        .iter()
        .any(|r| r[2] == "SkipReverse" && r[1].parse::<f64>().unwrap() < 0.0));
    assert!(rows[1..].iter().all(|r| r[3] == "analytic"));
}

#[test]
fn weak_loaded_tail_approaches_load_over_friction() {
    let o = run(&[
        "vp-curve",
        "--epsilon",
        "0.05",
        "--w",
        "0.01",
        "--u0",
        "2.8",
        "--grid",
        "2",
        "--vr-min",
        "19",
        "--vr-max",
        "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    let tail: f64 = rows[2][1].parse().unwrap();
    // −W R²/ζ in units of V_S is −w/ε
    assert!((tail + 0.2).abs() < 0.02, "{tail}");
}

#[test]
fn force_velocity_shapes() {
    let slow = run(&[
        "force-velocity",
        "--vr",
        &(0.5 * 4.0 / PI).to_string(),
        "--epsilon",
        "0.05",
        "--grid",
        "41",
    ]);
    assert!(slow.status.success(), "{}", stderr(&slow));
    let rows = data_rows(&stdout(&slow));
    assert_eq!(rows[0], ["W_over_F", "V_P_over_V_S", "stalled"]);
    let onset = 0.05 * (4.0 / PI - 0.5 * 4.0 / PI);
    for r in &rows[1..] {
        let (w, vp): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        if w < onset {
            assert!((vp - 0.5 * 4.0 / PI).abs() < 1e-12);
        }
    }

    let fast = run(&[
        "force-velocity",
        "--vr",
        &(2.0 * 4.0 / PI).to_string(),
        "--epsilon",
        "0.05",
        "--grid",
        "41",
    ]);
    let rows = data_rows(&stdout(&fast));
    let v: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(v.windows(2).all(|p| p[1] < p[0]));
    assert!(stderr(&fast).contains("stall_W_over_F"));
}

#[test]
fn skip_velocity_scan_shape() {
    let o = run(&[
        "skip-velocity",
        "--h-min",
        "2e-8",
        "--h-max",
        "1e-6",
        "--grid",
        "80",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows = data_rows(&text);
    assert_eq!(rows[0], ["H_m", "V_S_m_per_s", "omega_rad_per_s"]);
    let data: Vec<(f64, f64, f64)> = rows[1..]
        .iter()
        .map(|r| {
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    assert!(data.windows(2).all(|p| p[1].1 < p[0].1));
    let (h0, v0, _) = data[0];
    let (h1, v1, _) = data[1];
    let slope = (v1 / v0).ln() / (h1 / h0).ln();
    assert!((slope + 2.25).abs() < 0.02 * 2.25, "{slope}");
    // tens of nm give kHz-scale angular velocity
    let omega_30nm = data.iter().find(|d| d.0 >= 3e-8).unwrap().2;
    assert!((1e3..1e5).contains(&omega_30nm), "{omega_30nm}");
}
