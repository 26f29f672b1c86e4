use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tfbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfbounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tfbounds-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn small_bounds<'a>(cases: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec!["verify-bounds", "--case", cases, "--signal", "hermite:1", "--p", "2,inf"];
    args.extend_from_slice(extra);
    args
}

#[test]
fn identical_configs_give_identical_reports() {
    let (a, b) = (scratch("det-a.json"), scratch("det-b.json"));
    for out in [&a, &b] {
        let status = tfbounds(&small_bounds("T31i,T35ii,C38i", &["--out", path(out)])).status;
        assert_eq!(status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn coarse_grid_reports_guard_failures() {
    let out = scratch("coarse.json");
    let run = tfbounds(&["verify-identities", "--grid", "64", "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(3));
    let report = read_json(&out);
    assert_eq!(report["summary"]["outcome"], "infeasible");
    let errors = report["results"]["errors"].as_array().unwrap();
    assert_eq!(errors[0]["kind"], "aliasing");
}

#[test]
fn dash_streams_json_to_stdout() {
    let run = tfbounds(&small_bounds("T31i", &["--out", "-"]));
    assert_eq!(run.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["command"], "verify-bounds");
    assert_eq!(report["summary"]["total"], 2 * 3 * 2);
}

#[test]
fn empty_battery_passes_with_an_empty_report() {
    let cfg = scratch("empty.json");
    std::fs::write(&cfg, r#"{"cases": [], "grid": {"half_width": 12.0, "m": 256}}"#).unwrap();
    let out = scratch("empty-report.json");
    let run = tfbounds(&["donoho-stark", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(0));
    let report = read_json(&out);
    assert_eq!(report["results"].as_array().unwrap().len(), 0);
    assert_eq!(report["config"]["grid"]["m"], 256);
}

#[test]
fn configuration_errors_exit_three() {
    assert_eq!(tfbounds(&["verify-bounds", "--case", "T99"]).status.code(), Some(3));
    assert_eq!(tfbounds(&["verify-bounds", "--omega", "cosh"]).status.code(), Some(3));
    assert_eq!(tfbounds(&["frobnicate"]).status.code(), Some(3));
    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"tolerances": {"rel": -1.0, "abs": 1e-12}}"#).unwrap();
    assert_eq!(tfbounds(&["verify-bounds", "--config", path(&cfg)]).status.code(), Some(3));
}

#[test]
fn infeasible_mu_is_a_structured_error() {
    let out = scratch("infeasible.json");
    let run = tfbounds(&small_bounds("T35ii", &["--mu", "0.01", "--out", path(&out)]));
    assert_eq!(run.status.code(), Some(3));
    let report = read_json(&out);
    let entries = report["results"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        assert_eq!(e["error"]["kind"], "infeasible");
        assert_eq!(e["error"]["params"]["signal"], "hermite:1");
    }
}

#[test]
fn flags_override_the_config_file() {
    let cfg = scratch("override.json");
    std::fs::write(&cfg, r#"{"weights": ["power:0.5"], "lambdas": [1.0], "signals": ["gaussian"]}"#).unwrap();
    let out = scratch("override-report.json");
    let run = tfbounds(&["verify-bounds", "--config", path(&cfg), "--lambda", "0.5", "--case", "T31i", "--p", "2", "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(0));
    let report = read_json(&out);
    let v = &report["results"][0]["verdict"];
    assert_eq!(v["params"]["lambda"], 0.5);
    assert_eq!(v["params"]["omega"], "power:0.5");
}

#[test]
fn sweep_csv_has_one_line_per_entry() {
    let csv = scratch("sweep.csv");
    let run = tfbounds(&small_bounds("T31i,T35ii,C38i", &["--out", path(&scratch("sweep.json")), "--csv", path(&csv)]));
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 3 * 2);
    assert!(text.lines().skip(1).all(|l| l.contains(",pass,")));
}

#[test]
fn hermite_wigner_heatmap_marks_negative_regions() {
    let (pgm, report) = (scratch("h2.pgm"), scratch("h2.json"));
    let run = tfbounds(&[
        "heatmap", "--repr", "wigner", "--signal", "hermite:2", "--grid", "12,256",
        "--out", path(&pgm), "--report", path(&report),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let bytes = std::fs::read(&pgm).unwrap();
    let header = b"P5\n256 256\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    let markers = bytes[header.len()..].iter().filter(|&&p| p == 0).count();
    assert!(markers > 0);
    assert_eq!(read_json(&report)["results"]["negative_samples"], markers);
}

#[test]
fn counterexample_concentration_increases() {
    let run = tfbounds(&["counterexample", "--s", "1,2,4", "--out", "-"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("s,valid,F,"));
    let f: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(f.len(), 3);
    assert!(f.windows(2).all(|w| w[1] > w[0]), "{f:?}");
}
