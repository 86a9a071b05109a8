//! End-to-end runs of the `oddeven` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DESK_PROBE: &str = r#"{"intensity_w_cm2": 2e14, "wavelength_nm": 1600, "cycles": 5}"#;
const SHORT_PROBE: &str = r#"{"intensity_w_cm2": 1e14, "wavelength_nm": 1600, "cycles": 3}"#;

fn oddeven(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddeven"))
        .args(args)
        .current_dir(dir)
        .env_remove("ODDEVEN_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn malformed_config_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("missing.json", r#"{"probe": {"intensity_w_cm2": 2e14}}"#),
        ("unknown.json", r#"{"probe": {"intensity_w_cm2": 2e14, "wavelength_nm": 1600, "cycles": 5, "colour": 1}}"#),
        ("negative.json", r#"{"probe": {"intensity_w_cm2": -2e14, "wavelength_nm": 1600, "cycles": 5}}"#),
        ("atom.json", r#"{"probe": {"intensity_w_cm2": 2e14, "wavelength_nm": 1600, "cycles": 5}, "atom": "Xe"}"#),
        ("syntax.json", "{not json"),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let out = oddeven(&["groundstate", "--config", &cfg, "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("config error"), "{name}");
    }
    let out = oddeven(&["groundstate", "--config", "does-not-exist.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = oddeven(&["no-such-command"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn groundstate_reports_hydrogen_and_argon() {
    let dir = TempDir::new().unwrap();
    for (atom, energy) in [("H", -0.5), ("Ar", -0.5792)] {
        let cfg = write(
            dir.path(),
            "gs.json",
            &format!(r#"{{"probe": {DESK_PROBE}, "atom": "{atom}"}}"#),
        );
        let out = oddeven(&["groundstate", "--config", &cfg, "--out", atom], dir.path());
        ok(&out);
        let report = json(&dir.path().join(atom).join("groundstate.json"));
        let e = report["energy_au"].as_f64().unwrap();
        assert!((e - energy).abs() < 1e-3, "{atom}: {e}");
        assert!(report["soft_core_a"].as_f64().unwrap() > 0.0);
        assert_eq!(report["grid"]["dx"].as_f64(), Some(0.2));
        assert!(dir.path().join(atom).join("groundstate.bin").exists());
    }
}

#[test]
fn orbits_cutoff_and_reversal_points() {
    let dir = TempDir::new().unwrap();
    ok(&oddeven(&["orbits", "--cutoff", "--out", "o"], dir.path()));
    let report = json(&dir.path().join("o/orbits.json"));
    let t = &report["trajectories"][0];
    let c = t["C"].as_f64().unwrap().abs();
    assert!((c - 2.558).abs() < 0.02 * 2.558, "|C| = {c}");
    let points: Vec<f64> = t["reversal_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(points.len(), 4);
    for (k, (p, quoted)) in points.iter().zip([0.307, 0.921, 1.535, 2.149]).enumerate() {
        let expected = (k as f64 + 0.5) * std::f64::consts::PI / (2.0 * c);
        assert!((p - expected).abs() < 1e-12);
        assert!((p - quoted).abs() < 0.02 * quoted, "k = {k}: {p}");
    }
}

#[test]
fn orbits_sub_cutoff_energy_has_two_branches() {
    let dir = TempDir::new().unwrap();
    ok(&oddeven(&["orbits", "--energy", "2.0", "--out", "o"], dir.path()));
    let report = json(&dir.path().join("o/orbits.json"));
    let ts = report["trajectories"].as_array().unwrap();
    assert_eq!(ts.len(), 2);
    assert_eq!(ts[0]["branch"], "short");
    assert_eq!(ts[1]["branch"], "long");
    let (c0, c1) = (ts[0]["C"].as_f64().unwrap(), ts[1]["C"].as_f64().unwrap());
    assert!((c0 - c1).abs() > 0.1, "{c0} {c1}");
    for t in ts {
        assert!((t["energy_up"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    }
    let out = oddeven(&["orbits", "--energy", "5.0", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn orbits_for_a_harmonic_need_a_probe() {
    let dir = TempDir::new().unwrap();
    let out = oddeven(&["orbits", "--harmonic", "151"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(dir.path(), "p.json", &format!(r#"{{"probe": {DESK_PROBE}}}"#));
    ok(&oddeven(&["orbits", "--harmonic", "151", "--config", &cfg, "--out", "o"], dir.path()));
    assert_eq!(json(&dir.path().join("o/orbits.json"))["trajectories"].as_array().unwrap().len(), 2);
}

fn synthetic_scan_config(dir: &Path) -> String {
    write(
        dir,
        "scan.json",
        &format!(
            r#"{{"base": {{"probe": {DESK_PROBE}}}, "variable": "gamma",
                "values": [0.3, 0.05, 0.2, 0.2, 0.45, 0.1, 0.55]}}"#
        ),
    )
}

#[test]
fn synthetic_scan_is_sorted_deterministic_and_stamped() {
    let dir = TempDir::new().unwrap();
    let cfg = synthetic_scan_config(dir.path());
    ok(&oddeven(&["scan", "--config", &cfg, "--synthetic", "--parallel", "1", "--out", "a", "--svg"], dir.path()));
    ok(&oddeven(&["scan", "--config", &cfg, "--synthetic", "--parallel", "3", "--out", "b"], dir.path()));
    let a = std::fs::read_to_string(dir.path().join("a/scan.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/scan.csv")).unwrap();
    assert_eq!(a, b);
    assert!(dir.path().join("a/scan.svg").exists());

    let mut lines = a.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# oddeven ") && header.contains("config-sha256 "));
    assert_eq!(lines.next().unwrap(), "value,ET_au,gamma,order,eta,I_even,I_odd_avg,flag");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let values: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    let dup: Vec<_> = rows.iter().filter(|r| r[0] == "0.2").collect();
    assert_eq!(dup.len(), 2);
    assert_eq!(dup[0], dup[1]);
    for r in &rows {
        let g: f64 = r[2].parse().unwrap();
        let eta: f64 = r[4].parse().unwrap();
        let law = (2.558 * g).tan().powi(2);
        assert!((eta - law).abs() <= 1e-5 * law.max(1e-300), "{g}: {eta} vs {law}");
    }
}

#[test]
fn tdse_scan_matches_across_parallelism() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "scan.json",
        &format!(
            r#"{{"base": {{"probe": {SHORT_PROBE}}}, "variable": "et_au",
                "values": [6e-5, 3e-5, 6e-5], "monitored_order": 60}}"#
        ),
    );
    ok(&oddeven(&["scan", "--config", &cfg, "--parallel", "1", "--out", "a"], dir.path()));
    ok(&oddeven(&["scan", "--config", &cfg, "--parallel", "2", "--out", "b"], dir.path()));
    let a = std::fs::read(dir.path().join("a/scan.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/scan.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], rows[2]);
    assert!(rows[0].starts_with("0.00003,") && rows[0].contains(",60,"));
}

#[test]
fn collapse_of_identical_scans_is_zero() {
    let dir = TempDir::new().unwrap();
    let scan = format!(
        r#"{{"base": {{"probe": {DESK_PROBE}}}, "variable": "gamma",
            "values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]}}"#
    );
    let cfg = write(dir.path(), "c.json", &format!(r#"{{"scans": [{scan}, {scan}]}}"#));
    ok(&oddeven(&["collapse", "--config", &cfg, "--synthetic", "--out", "o", "--svg"], dir.path()));
    let report = json(&dir.path().join("o/collapse.json"));
    assert_eq!(report["metric"].as_f64(), Some(0.0));
    let csv = std::fs::read_to_string(dir.path().join("o/collapse.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("config_id,gamma,eta"));
    assert_eq!(csv.lines().count(), 2 + 2 * 9);

    // a scan that stops short of the grid
    let short = format!(r#"{{"base": {{"probe": {DESK_PROBE}}}, "variable": "gamma", "values": [0.1, 0.3]}}"#);
    let cfg = write(dir.path(), "c2.json", &format!(r#"{{"scans": [{scan}, {short}]}}"#));
    let out = oddeven(&["collapse", "--config", &cfg, "--synthetic", "--out", "o2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient overlap"));

    let cfg = write(dir.path(), "c3.json", &format!(r#"{{"scans": [{scan}]}}"#));
    let out = oddeven(&["collapse", "--config", &cfg, "--synthetic"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synthetic_reconstruction_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        &format!(
            r#"{{"probe": {DESK_PROBE}, "thz": {{"amplitude_kv_cm": 257, "frequency_thz": 1.3}},
                "delays": {{"count": 24}}}}"#
        ),
    );
    ok(&oddeven(&["reconstruct", "--config", &cfg, "--synthetic", "--out", "o", "--svg"], dir.path()));
    let report = json(&dir.path().join("o/report.json"));
    assert_eq!(report["delays"].as_u64(), Some(24));
    assert!(report["rms_fraction_of_peak"].as_f64().unwrap() < 1e-12);
    assert!(dir.path().join("o/manifest.json").exists());
    assert!(dir.path().join("o/waveform.svg").exists());
    let csv = std::fs::read_to_string(dir.path().join("o/waveform.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 24);
}

#[test]
fn zero_thz_reconstructs_to_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "r.json",
        &format!(
            r#"{{"probe": {DESK_PROBE}, "thz": {{"amplitude_kv_cm": 0, "frequency_thz": 1.3}},
                "delays": {{"count": 8}}}}"#
        ),
    );
    ok(&oddeven(&["reconstruct", "--config", &cfg, "--synthetic", "--out", "o"], dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("o/waveform.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0);
        // below the working range every sample is flagged
        assert_ne!(cols[4], "valid");
    }
    // the TDSE path refuses a field outside the working range
    let out = oddeven(&["reconstruct", "--config", &cfg, "--out", "o2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synthetic_spectrum_peaks_at_the_injected_order() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", &format!(r#"{{"probe": {DESK_PROBE}}}"#));
    ok(&oddeven(&["spectrum", "--config", &cfg, "--synthetic", "21", "--svg", "--out", "o"], dir.path()));
    let report = json(&dir.path().join("o/spectrum.json"));
    assert!((report["peak_order"].as_f64().unwrap() - 21.0).abs() < 0.1);
    let svg = std::fs::read_to_string(dir.path().join("o/spectrum.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_oddeven"))
        .args(["orbits", "--cutoff"])
        .current_dir(dir.path())
        .env("ODDEVEN_OUT", dir.path().join("from-env"))
        .output()
        .unwrap();
    ok(&out);
    assert!(dir.path().join("from-env/orbits.json").exists());
}
