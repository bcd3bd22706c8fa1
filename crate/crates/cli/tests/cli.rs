use std::path::Path;
use std::process::Command;

use flatdet_cli::config::ExperimentId;
use flatdet_cli::runner::{prepare, RunRequest};
use serde_json::Value;

fn flatdet(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flatdet"))
        .args(args)
        .current_dir(dir)
        .env("FLATDET_CACHE_DIR", dir.join("cache"))
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn key_for(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    prepare(&RunRequest { config: Some(path), ..Default::default() }).unwrap().key
}

#[test]
fn cache_key_ignores_key_order_and_format() {
    let dir = tempfile::tempdir().unwrap();
    let a = key_for(
        dir.path(),
        "a.json",
        r#"{"experiment": "ruelle-cat", "seed": 4, "parameters": {"n_max": 50, "alpha": "pi"}}"#,
    );
    let b = key_for(
        dir.path(),
        "b.json",
        r#"{"parameters": {"alpha": 3.141592653589793, "n_max": 50}, "seed": 4, "experiment": "ruelle-cat"}"#,
    );
    let c = key_for(dir.path(), "c.toml", "seed = 4\nexperiment = \"ruelle-cat\"\n[parameters]\nn_max = 50\nalpha = \"pi\"\n");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let d = key_for(dir.path(), "d.json", r#"{"experiment": "ruelle-cat", "seed": 5, "parameters": {"n_max": 50}}"#);
    assert_ne!(a, d);
}

#[test]
fn output_path_does_not_enter_the_key() {
    let base = RunRequest { experiment: Some(ExperimentId::CircleTorsion), ..Default::default() };
    let other = RunRequest { output: Some("elsewhere.json".into()), ..base.clone() };
    assert_eq!(prepare(&base).unwrap().key, prepare(&other).unwrap().key);
}

#[test]
fn malformed_config_exits_two_without_a_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "experiment = \"hodge-anomaly\"\n[parameters]\nfamilies = -3\n").unwrap();
    let (code, _, err) = flatdet(dir.path(), &["run", "--config", "bad.toml", "--output", "out/r.json"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("parameters.families"), "{err}");
    assert!(!dir.path().join("out").exists());

    std::fs::write(dir.path().join("extra.json"), r#"{"experiment": "finite-bv", "colour": 1}"#).unwrap();
    let (code, _, err) = flatdet(dir.path(), &["run", "--config", "extra.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"), "{err}");
    assert!(!dir.path().join("reports").exists());

    let (code, _, _) = flatdet(dir.path(), &["run", "no-such-experiment"]);
    assert_eq!(code, 2);
}

#[test]
fn circle_example_gives_three_rows_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = flatdet(dir.path(), &["run", "circle-torsion", "--theta", "pi", "--radii", "0.5,1,2"]);
    assert_eq!(code, 0, "{err}");
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("reports/circle-torsion.json")).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r["value"].as_f64().unwrap() - 2.0).abs() < 1e-8);
        assert_eq!(r["provenance"], "derived-oracle");
    }
    assert_eq!(doc["config"]["parameters"]["radii"], serde_json::json!([0.5, 1.0, 2.0]));
    assert!(dir.path().join("reports/circle-torsion.csv").exists());
    assert!(dir.path().join("reports/circle-torsion.timing.json").exists());
}

#[test]
fn reports_are_byte_reproducible_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "finite-bv", "--seeds", "4", "--trace-cases", "2", "--duhamel-cases", "2", "--seed", "11"];
    let run = |out: &str, extra: &[&str]| {
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--output", out]);
        a.extend(extra);
        let (code, _, err) = flatdet(dir.path(), &a);
        assert_eq!(code, 0, "{err}");
        (std::fs::read(dir.path().join(out)).unwrap(), err)
    };
    let (first, _) = run("a.json", &["--no-cache", "--jobs", "1"]);
    let (second, _) = run("b.json", &["--no-cache", "--jobs", "3"]);
    assert_eq!(first, second);
    let (_, err) = run("c.json", &[]);
    assert!(!err.contains("cached"));
    let (cached, err) = run("d.json", &[]);
    assert!(err.contains("cached"), "{err}");
    assert_eq!(first, cached);
}

#[test]
fn failing_verdict_exits_one_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    // the tolerance is below what double precision can reach
    let (code, _, _) = flatdet(
        dir.path(),
        &["run", "ruelle-cat", "--tol", "zeta_at_zero=0", "--zero-alphas", "2pi/3", "--no-cache", "--output", "r.json"],
    );
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(code, if doc["passed"].as_bool().unwrap() { 0 } else { 1 });

    // below the abscissa the experiment records a failure
    let (code, _, _) = flatdet(dir.path(), &["run", "ruelle-cat", "--lambda-grid", "0.5,2", "--no-cache", "--output", "s.json"]);
    assert_eq!(code, 1);
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], false);
    assert!(doc["failures"][0].as_str().unwrap().contains("abscissa"));
    assert_eq!(doc["rows"].as_array().unwrap().iter().filter(|r| r["case"].as_str().unwrap().starts_with("lambda=")).count(), 1);
}

#[test]
fn tool_commands_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = flatdet(dir.path(), &["torsion", "circle", "--theta", "pi/2", "--radius", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["analytic"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-10);

    let (code, out, _) = flatdet(dir.path(), &["ruelle", "cat", "--lambda-grid", "2", "--csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("lambda,zeta_re"));
    assert_eq!(out.lines().count(), 2);

    let (code, out, _) = flatdet(dir.path(), &["list"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);

    let (code, _, _) = flatdet(dir.path(), &["torsion", "circle"]);
    assert_eq!(code, 2);
}

#[test]
fn zeta_and_hodge_tools_read_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"degrees": [{"eigs": [[2, 0]]}, {"eigs": [[2, 0], [3, 0]]}]}"#).unwrap();
    let (code, out, err) = flatdet(dir.path(), &["zeta", "eval", "--spectrum", "s.json"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    // degree 1 enters with coefficient +1: log sdet = log 2 + log 3
    assert!((v["log_sdet"][0].as_f64().unwrap() - 6f64.ln()).abs() < 1e-12, "{out}");

    let complex = r#"{"dims": [1, 1], "maps": {"d": {"shift": 1, "blocks": [[[[2, 0]]], []]}}}"#;
    std::fs::write(dir.path().join("c.json"), complex).unwrap();
    let metric = r#"{"degrees": [{"type": "constant", "gram": [[[1, 0]]]}, {"type": "exp_linear", "g0": [[[1, 0]]], "h": [[[0.5, 0]]]}]}"#;
    std::fs::write(dir.path().join("m.json"), metric).unwrap();
    let (code, out, err) = flatdet(dir.path(), &["hodge", "anomaly", "--complex", "c.json", "--metric", "m.json", "--tau-grid", "0,0.5,1"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}
