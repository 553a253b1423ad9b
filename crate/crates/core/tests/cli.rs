use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lti-sysid")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    cli(args).status.code().unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split_whitespace().last().unwrap().parse().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_estimate_realize() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let est = dir.path().join("g.csv");
    let real = dir.path().join("r.json");
    ok(&["simulate", "--system", "unstable_3x3", "-n", "40", "-t", "10", "--seed", "5", "--out", p(&data)]);
    let text = ok(&["estimate", "--data", p(&data), "--method", "full", "--out", p(&est)]);
    assert!(field(&text, "spectral_error") < 1e-9, "{text}");
    assert!(est.is_file());

    ok(&["hokalman", "--estimate", p(&est), "--order", "3", "--t1", "4", "--t2", "5", "--out", p(&real)]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&real).unwrap()).unwrap();
    assert_eq!(r["order"], 3);

}

const STABLE: &str = r#"{"a": [[0.5, 0.2], [0.0, -0.3]], "b": [[1.0], [1.0]], "c": [[1.0, 0.0]], "d": [[0.0]],
    "b_w": [[1.0, 0.0], [0.0, 1.0]], "d_v": [[1.0]]}"#;

#[test]
fn fir_report_on_stable_system() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    fs::write(&sys, STABLE).unwrap();
    let data = dir.path().join("data");
    let est = dir.path().join("g.csv");
    ok(&["simulate", "--system", p(&sys), "-n", "200", "-t", "10", "--sigma-v", "0.1", "--out", p(&data)]);
    ok(&["estimate", "--data", p(&data), "--out", p(&est)]);
    let fir = ok(&["fir-report", "--system", p(&sys), "--estimate", p(&est)]);
    assert_eq!(field(&fir, "grid_points"), 80.0);
    let (e, tail, total) = (field(&fir, "ols_error_hinf"), field(&fir, "tail_bound"), field(&fir, "total_bound"));
    assert!(e > 0.0 && tail > 0.0 && tail < 1e-2);
    assert!((total - (e + tail)).abs() <= 1e-6 * total);
    assert_eq!(code(&["fir-report", "--system", p(&sys), "--estimate", p(&est), "--grid", "10"]), 2);
}

#[test]
fn unequal_length_estimate_is_shorter() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let est = dir.path().join("g.csv");
    ok(&["simulate", "--system", "newton", "-n", "30", "-t", "12", "--sigma-v", "0.3", "--out", p(&data)]);
    let text = ok(&["estimate", "--data", p(&data), "--method", "unequal", "--t1", "4", "--out", p(&est)]);
    assert_eq!(field(&text, "T1"), 4.0);
    assert_eq!(field(&text, "T2"), 12.0);
    assert_eq!(code(&["estimate", "--data", p(&data), "--method", "final", "--t1", "4", "--out", p(&est)]), 2);
}

#[test]
fn bound_json_has_report_fields() {
    let text = ok(&[
        "bound", "--system", "newton", "--theorem", "1", "--delta", "0.1", "-t", "10", "-n", "1000", "--sigma-v", "0.5",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["N_threshold", "valid", "C0", "C1", "C2", "bound_value", "F_norm", "Dv_norm", "H_norm"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["C0"], 0.0);
    let table = ok(&["bound", "--system", "newton", "--theorem", "cor2", "-t", "10", "-n", "1000", "--sigma-0", "1"]);
    assert!(field(&table, "C0") > 0.0);
}

#[test]
fn check_reports_hold_fraction() {
    let text = ok(&["check", "--system", "newton", "--prop", "2", "--trials", "40", "-t", "5", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["trials"], 40);
    assert!(v["hold_fraction"].as_f64().unwrap() >= 0.9);
    assert_eq!(code(&["check", "--system", "newton", "--prop", "5", "-t", "5"]), 2);
}

#[test]
fn sweep_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
            "system": {"newton_delta": 0.2},
            "noise": {"sigma_u": 1.0, "sigma_w": 0.2, "sigma_v": 0.5},
            "sweep": {"kind": "n", "values": [20, 40], "t": 5},
            "methods": ["full", "final_sample"],
            "seeds": 3,
            "root_seed": 11
        }"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["sweep", "--config", p(&cfg), "--out", p(&a)]);
    ok(&["sweep", "--config", p(&cfg), "--out", p(&b)]);
    for f in ["results.csv", "summary.csv", "plot.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // final_sample needs N >= 5 here; both N values qualify, so nothing is missing
    assert!(!a.join("missing.csv").exists());
    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["bound", "--system", "nope", "-t", "5", "-n", "10"]), 2);

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"system": "unstable_3x3", "sweep": {"kind": "n", "values": [], "t": 5}, "methods": ["full"]}"#)
        .unwrap();
    assert_eq!(code(&["sweep", "--config", p(&cfg)]), 2);

    let data = dir.path().join("data");
    let est = dir.path().join("g.csv");
    // one rollout of a 3-input system spans only 8 of 24 input directions
    ok(&["simulate", "--system", "unstable_3x3", "-n", "1", "-t", "8", "--out", p(&data)]);
    assert_eq!(code(&["estimate", "--data", p(&data), "--method", "final", "--out", p(&est)]), 3);
    assert_eq!(code(&["estimate", "--data", p(&data), "--out", p(&est)]), 3);

    ok(&["simulate", "--system", "unstable_3x3", "-n", "20", "-t", "8", "--out", p(&data)]);
    ok(&["estimate", "--data", p(&data), "--out", p(&est)]);
    assert_eq!(code(&["fir-report", "--system", "unstable_3x3", "--estimate", p(&est)]), 3);
}
