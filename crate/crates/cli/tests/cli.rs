use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lcris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcris")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

const SPECULAR: &str = r#"{"beams":[{"aoa":{"az_deg":45},"aod":{"az_deg":135}}]}"#;
const REPLICA: &str = r#"{"beams":[
  {"aoa":{"az_deg":90},"aod":{"az_deg":140}},
  {"aoa":{"az_deg":90},"aod":{"az_deg":120}},
  {"aoa":{"az_deg":90},"aod":{"az_deg":60}},
  {"aoa":{"az_deg":90},"aod":{"az_deg":40}}]}"#;

#[test]
fn solve_single_on_specular_config_is_free() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("result.json");
    fs::write(&cfg, SPECULAR).unwrap();
    let o = lcris(&["solve", "single", "--config", arg(&cfg), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["beams"][0]["tau_ms"], 0.0);
    assert_eq!(r["config"]["codebook"]["q"], 256);
    assert_eq!(r["method"], "single");
}

#[test]
fn solve_methods_order_totals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, REPLICA).unwrap();
    let mut totals = Vec::new();
    for m in ["legacy", "single", "joint"] {
        let out = dir.path().join(format!("{m}.json"));
        let o = lcris(&["solve", m, "--config", arg(&cfg), "--out", arg(&out)]);
        assert!(o.status.success());
        let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(r["beams"].as_array().unwrap().len(), 4);
        totals.push(r["total_ms"].as_f64().unwrap());
    }
    assert!(totals[1] < totals[0]);
    assert!(totals[2] <= totals[1]);
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_two() {
    let o = lcris(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let d = stderr_json(&o);
    assert_eq!(d["error"], "usage");
    assert!(d["message"].as_str().unwrap().contains("Usage"));
}

#[test]
fn parse_and_validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("r.json");
    fs::write(&cfg, "{\"beams\": [").unwrap();
    let o = lcris(&["solve", "single", "--config", arg(&cfg), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let d = stderr_json(&o);
    assert_eq!(d["error"], "parse");
    assert!(d["location"].as_str().unwrap().contains("cfg.json:1:"));

    fs::write(&cfg, r#"{"codebook":{"q":0},"beams":[]}"#).unwrap();
    let o = lcris(&["solve", "single", "--config", arg(&cfg), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"]
        .as_str()
        .unwrap()
        .contains("codebook.q must be >= 2"));
}

#[test]
fn fit_model_writes_model_json() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let out = dir.path().join("m.json");
    fs::write(&samples, "phase_deg,time_ms\n-360,80\n0,0\n360,20\n").unwrap();
    let o = lcris(&[
        "fit-model",
        "--samples",
        arg(&samples),
        "--breakpoints",
        "3",
        "--out",
        arg(&out),
    ]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let bps = m["breakpoints"].as_array().unwrap();
    assert_eq!(bps.len(), 3);
    assert_eq!(bps[0]["time_ms"], 80.0);
    assert_eq!(bps[1]["phase_deg"], 0.0);

    // the fitted model is usable from a config next to it
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model":"m.json","beams":[{"aoa":{"az_deg":45},"aod":{"az_deg":135}}]}"#,
    )
    .unwrap();
    let o = lcris(&[
        "solve",
        "single",
        "--config",
        arg(&cfg),
        "--out",
        arg(&dir.path().join("r.json")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pattern_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let profile = dir.path().join("p.json");
    let out = dir.path().join("p.csv");
    fs::write(&cfg, SPECULAR).unwrap();
    fs::write(&profile, format!(r#"{{"indices":{:?},"beam":0}}"#, vec![0; 12])).unwrap();
    let o = lcris(&[
        "pattern",
        "--config",
        arg(&cfg),
        "--profile",
        arg(&profile),
        "--grid",
        "130:140:1",
        "--out",
        arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "angle_deg,gain_db");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[6], "135,0");

    let o = lcris(&[
        "pattern",
        "--config",
        arg(&cfg),
        "--profile",
        arg(&profile),
        "--grid",
        "1:2",
        "--out",
        arg(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"experiment":{"workers":2}}"#).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = lcris(&["experiment", "joint-beam", "--config", arg(&cfg), "--out", arg(out)]);
        assert!(o.status.success());
    }
    for name in ["runs.csv", "summary.json", "hist_joint.csv", "cdf_legacy.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn bulk_experiment_writes_9261_runs_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("bulk");
    fs::write(&cfg, r#"{"experiment":{"workers":4}}"#).unwrap();
    let o = lcris(&["experiment", "bulk", "--config", arg(&cfg), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let count = |m: &str| runs.lines().skip(1).filter(|l| l.split(',').nth(1) == Some(m)).count();
    assert_eq!(count("single"), 9261);
    assert_eq!(count("legacy"), 9261);
}
