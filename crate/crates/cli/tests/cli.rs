use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tanjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanjet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn file_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &["--budget", "150", "--radii", "0.1:0.5:5"];

#[test]
fn truncate_prints_the_polynomial() {
    let out = tanjet(&["truncate", "x1^2 + x2^2 - sin(x3)^2", "--n", "3", "--k", "3"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["map"], "x1^2 + x2^2 - x3^2");
    assert_eq!(v["k"], 3);

    let out = tanjet(&["truncate", "exp(x1)", "--n", "1", "--k", "2", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "component,exponents,coefficient\n1,0,1.0\n1,1,1.0\n1,2,0.5\n"
    );
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["truncate", "x1 +", "--n", "2", "--k", "2"][..],
        &["truncate", "log(x1)", "--n", "1", "--k", "2"],
        &["truncate", "x1"],
        &["sample", "x1", "--n", "1", "--radii", "0.1:2:3"],
        &["lambda", "x1", "--n", "2", "--at", "nope"],
        &["grassmann", "[[1,0]]", "[[1,0,0]]"],
        &["frobnicate"],
    ] {
        let out = tanjet(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn lambda_and_grassmann_report_numbers() {
    let out = tanjet(&["lambda", "x1^2 + x2^2 - x3^2", "--n", "3", "--at", "0.3,0,-0.4"]);
    assert_eq!(code(&out), 0);
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-15);

    let out = tanjet(&["grassmann", "[[1,0,0,0],[0,1,0,0]]", "[[1,0,0,0],[0,0,1,0]]"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!((v["delta"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sample_and_delta_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out_dir, seed) in [(&a, "1"), (&b, "2")] {
        let out = tanjet(&[
            "sample",
            "x1^2 + x2^2 - x3^2",
            "--n",
            "3",
            "--r",
            "0.1",
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("IS of dimension 2"));
    }
    let out = tanjet(&[
        "delta",
        a.join("slices.jsonl").to_str().unwrap(),
        b.join("slices.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let h = v["hausdorff"].as_f64().unwrap();
    assert!(h > 0.0 && h < 0.01, "{h}");

    let csv_dir = dir.path().join("csv");
    let out = tanjet(&[
        "sample",
        "x1^2 + x2^2 - x3^2",
        "--n",
        "3",
        "--format",
        "csv",
        "--out",
        csv_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(csv_dir.join("slices.csv")).unwrap();
    assert!(text.starts_with("r,x1,x2,x3,n1_1,n1_2,n1_3,lambda\n"), "{}", &text[..80]);
}

#[test]
fn numeric_failures_exit_with_three() {
    let out = tanjet(&["sample", "x1^2 + x2^2 + x3^2", "--n", "3", "--r", "0.1"]);
    assert_eq!(code(&out), 3);
    let mut args = vec!["verify", "x1^2 + x2^2 + x3^2", "x1^2 + x2^2 - x3^2", "--n", "3", "--s", "1"];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&tanjet(&args)), 3);
}

#[test]
fn verify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let mut pass = vec![
        "verify",
        "x1^2 + x2^2 - sin(x3)^2",
        "x1^2 + x2^2 - x3^2",
        "--n",
        "3",
        "--s",
        "1",
        "--tangential",
        "--out",
        out_dir,
    ];
    pass.extend_from_slice(SMALL);
    let out = tanjet(&pass);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = file_json(&dir.path().join("report.json"));
    assert_eq!(report["s_equivalent"], true);
    assert_eq!(report["tangentially_s_equivalent"], true);
    assert_eq!(report["config"]["sampler"]["budget"], 150);

    let mut fail = vec!["verify", "x1^2 + x2^2 - x3^2", "x3", "--n", "3", "--s", "1"];
    fail.extend_from_slice(SMALL);
    assert_eq!(code(&tanjet(&fail)), 1);
}

#[test]
fn approximate_and_exponents_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let mut args = vec!["approximate", "x1^2 + x2^2 - x3^2", "--n", "3", "--s", "4", "--out", out_dir];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&tanjet(&args)), 0);
    let a = file_json(&dir.path().join("approximation.json"));
    assert_eq!(a["k_star"], 2);

    let mut args = vec!["exponents", "x1^2 + x2^2 - sin(x3)^2", "--n", "3", "--s", "1", "--out", out_dir];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&tanjet(&args)), 0);
    let p = file_json(&dir.path().join("profile.json"));
    assert!(p["k0"].as_u64().unwrap() >= 2);
    assert!(p["gamma"].as_f64().unwrap() <= 1.0);
}

fn corpus_entry(name: &str, map: &str, mode: &str, pair: Option<&str>) -> Value {
    let mut e = serde_json::json!({
        "name": name,
        "map": map,
        "arity": 3,
        "s": 1.0,
        "mode": mode,
        "schedule": { "R": 0.1, "rho": 0.5, "count": 5 },
        "budget": 150,
        "seed": 3
    });
    if let Some(p) = pair {
        e["pair"] = p.into();
    }
    e
}

#[test]
fn corpus_runs_write_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("corpus.json");
    let out_dir = dir.path().join("out");
    let body = serde_json::json!({ "entries": [
        corpus_entry("cone", "x1^2 + x2^2 - x3^2", "approximate", None),
        corpus_entry("sine", "x1^2 + x2^2 - sin(x3)^2", "verify", Some("x1^2 + x2^2 - x3^2")),
    ]});
    fs::write(&config, body.to_string()).unwrap();
    let out = tanjet(&["corpus", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().starts_with("cone,approximate,1,2,"));
    assert!(out_dir.join("reports/sine.json").is_file());
    assert!(out_dir.join("decay/cone.csv").is_file());

    let with_control = serde_json::json!({ "entries": [
        corpus_entry("control", "x3", "verify", Some("x1^2 + x2^2 - x3^2")),
    ]});
    fs::write(&config, with_control.to_string()).unwrap();
    let out = tanjet(&["corpus", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    let non_is = serde_json::json!({ "entries": [
        corpus_entry("point", "x1^2 + x2^2 + x3^2", "approximate", None),
    ]});
    fs::write(&config, non_is.to_string()).unwrap();
    let out = tanjet(&["corpus", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

#[test]
fn corpus_schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("corpus.json");
    let mut entry = corpus_entry("cone", "x1^2 + x2^2 - x3^2", "approximate", None);
    entry["schedule"]["rho"] = 2.0.into();
    fs::write(&config, serde_json::json!({ "entries": [entry] }).to_string()).unwrap();
    let out = tanjet(&["corpus", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("$.entries[0].schedule"), "{err}");

    let out = tanjet(&["corpus", "/nonexistent/corpus.json"]);
    assert_eq!(code(&out), 2);
}
