use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sim"))
        .args(args)
        .current_dir(dir)
        .env_remove("SIM_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = sim(args, dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str], dir: &Path) -> Value {
    serde_json::from_str(&ok(args, dir)).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn state_dump_has_expected_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["state", "psi00"], dir.path());
    assert_eq!(v["name"], "psi00");
    assert_eq!(v["photons"], 4);
    assert_eq!(v["normalized"], true);
    let terms = v["state"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 3);
    let mut amps: Vec<f64> = terms.iter().map(|t| t["amplitude"][0].as_f64().unwrap()).collect();
    amps.sort_by(f64::total_cmp);
    let s = 12f64.sqrt();
    for (a, want) in amps.iter().zip([1.0 / s, 1.0 / s, 2.0 / s]) {
        assert!((a - want).abs() < 1e-15);
    }
}

#[test]
fn phi2_at_a_third_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["state", "phi2", "--delta", "120"], dir.path());
    assert_eq!(v["equals_up_to_phase"], "psi01");
    let v = json(&["state", "phi2", "--delta", "45"], dir.path());
    assert!(v["equals_up_to_phase"].is_null());
}

#[test]
fn unknown_state_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sim(&["state", "psi33"], dir.path()).status.code(), Some(2));
    assert_eq!(sim(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        sim(&["project", "--state", "psi00", "--theta1", "0", "--theta2", "0", "--gamma", "1.5"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn singular_angle_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&["angles", "--theta1", "0"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("scan");
    let out = sim(
        &["scan", "--kind", "overlap", "--from", "0", "--to", "1", "--steps", "2", "--output", target.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    let out = sim(
        &["montecarlo", "--scan-file", "nope.json", "--peak-rate", "1", "--integration", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn project_reports_expected_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["project", "--format", "json", "--theta1", "magic", "--theta2", "magic"];
    let with_state = |s: &str| {
        let mut a = base.to_vec();
        a.extend(["--state", s]);
        json(&a, dir.path())
    };
    let psi00 = with_state("psi00");
    assert!((psi00["propagated"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    assert!(psi00["difference"].as_f64().unwrap() < 1e-12);
    for s in ["psi01", "psi02"] {
        assert!(with_state(s)["propagated"].as_f64().unwrap() < 1e-12);
    }
    let null = json(
        &["project", "--format", "json", "--state", "psi00", "--theta1", "0", "--theta2", "22.5"],
        dir.path(),
    );
    assert!(null["propagated"].as_f64().unwrap() < 1e-12);
    assert!(null["analytic"].is_null());

    let text = ok(&["project", "--state", "psi00", "--theta1", "magic", "--theta2", "magic"], dir.path());
    assert!(text.contains("propagated   0.3333333333"));
}

#[test]
fn angles_solves_the_locus() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["angles", "--theta1", "magic", "--format", "json"], dir.path());
    let magic = 2f64.sqrt().atan().to_degrees() / 4.0;
    assert!((v["theta2_deg"].as_f64().unwrap() - magic).abs() < 1e-9);
    assert!((v["tan_product"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn delta_scan_has_minima_at_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        &["scan", "--kind", "delta", "--from", "0", "--to", "360", "--steps", "36", "--theta", "magic", "--output", "d"],
        dir.path(),
    );
    assert!(out.contains("d.csv") && out.contains("d.manifest.json"));
    let rows = csv_rows(&dir.path().join("d.csv"));
    assert_eq!(rows.len(), 37);
    let values: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let first_min = values.iter().copied().reduce(|a, b| if b.1 < a.1 { b } else { a }).unwrap();
    assert!(first_min.1 < 1e-12);
    let minima: Vec<f64> = values.iter().filter(|v| v.1 < 1e-12).map(|v| v.0).collect();
    assert_eq!(minima.len(), 2);
    assert!((minima[0] - 120.0).abs() < 1e-9 && (minima[1] - 240.0).abs() < 1e-9);
    assert!((values[0].1 - 1.0 / 3.0).abs() < 1e-12);
    assert!(rows[0][2].is_empty() && rows[0][3].is_empty());

    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("d.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "scan");
    assert_eq!(manifest["spec"]["kind"], "delta");
}

#[test]
fn delay_scan_dips_to_a_third() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["scan", "--kind", "delay", "--from", "-3", "--to", "3", "--steps", "60", "--sigma", "1", "--state", "psi00", "--output", "dl"],
        dir.path(),
    );
    let rows = csv_rows(&dir.path().join("dl.csv"));
    let p: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((p[30] - 1.0 / 3.0).abs() < 1e-6);
    assert!((p[0] - 2.0 / 9.0).abs() < 1e-3 && (p[60] - 2.0 / 9.0).abs() < 1e-3);
}

#[test]
fn montecarlo_is_reproducible_and_honours_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["scan", "--kind", "delta", "--from", "0", "--to", "360", "--steps", "12", "--output", "s"], dir.path());
    let mut bytes = Vec::new();
    for name in ["m1", "m2"] {
        ok(
            &[
                "montecarlo", "--scan-file", "s.manifest.json", "--peak-rate", "4.89", "--background", "0.14",
                "--integration", "600", "--seed", "7", "--output", name,
            ],
            dir.path(),
        );
        bytes.push(std::fs::read(dir.path().join(format!("{name}.csv"))).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let rows = csv_rows(&dir.path().join("m1.csv"));
    assert_eq!(rows.len(), 13);
    assert!(rows.iter().all(|r| r[3].parse::<u64>().is_ok()));

    let out_dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sim"))
        .args(["montecarlo", "--scan-file", "s.manifest.json", "--peak-rate", "4.89", "--integration", "600", "--seed", "7"])
        .current_dir(dir.path())
        .env("SIM_OUTPUT_DIR", out_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.path().join("montecarlo.csv").exists());
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(out_dir.path().join("montecarlo.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn state_json_round_trips_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["state", "psi12"], dir.path());
    let back = biphoton::cli::parse_state_dump(&text).unwrap();
    let original = biphoton::states::bell_state(biphoton::states::BellIndex::new(1, 2).unwrap());
    assert!(back.approx_eq_up_to_phase(&original, 1e-15));
}
