//! End-to-end runs of the `fixpoint` binary: exit codes, report contents and
//! byte-for-byte determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixpoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixpoint"))
        .args(args)
        .env_remove("FIXPOINT_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_example1_converges() {
    let out = fixpoint(&["solve", "--map", "example1", "--x0", "1", "--tol", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["verdict"], "converged");
    assert!(v["limit"][0].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn solve_translation_diverges() {
    let out = fixpoint(&["solve", "--map", "zoo:nonexample-translation", "--x0", "0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdict"], "diverged-unbounded");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["solve"],
        vec!["solve", "--map", "example1"],
        vec!["solve", "--map", "expr:x/2+", "--x0", "1"],
        vec!["solve", "--map", "zoo:nope", "--x0", "1"],
        vec!["solve", "--map", "example1", "--x0", "1", "--tol", "-1"],
        vec!["solve", "--bogus"],
        vec!["certify", "--map", "expr:x/2", "--region", "0:1"],
        vec!["certify", "--map", "example1", "--region", "5:1"],
        vec!["certify", "--map", "example1", "--phi", "abs(x-y)"],
        vec!["envelope"],
        vec!["envelope", "--psi", "linear:1/3", "--region", "-1:1"],
        vec!["zoo", "describe", "nope"],
        vec![],
    ] {
        let out = fixpoint(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn parse_error_reports_offset() {
    let out = fixpoint(&["solve", "--map", "expr:x/2+", "--x0", "1"]);
    assert!(stderr(&out).contains("offset 4"), "{}", stderr(&out));
}

#[test]
fn failing_map_exits_1() {
    let out = fixpoint(&["solve", "--map", "expr:sqrt(x)", "--x0", "-1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("failed at iterate 1"));
}

#[test]
fn certify_example1_passes() {
    let out = fixpoint(&["certify", "--map", "example1", "--region", "0:10", "--n-max", "30"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["certificate"]["verdict"], "pass");
    let checks: Vec<&str> = v["certificate"]["children"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(
        checks,
        [
            "maps-domain-into-itself",
            "psi-boyd-wong",
            "envelope-properties",
            "asymptotic-pointwise-contraction"
        ]
    );
    assert_eq!(v["orbit_probe"]["bounded"], true);
}

#[test]
fn certify_global_uniform_is_strict() {
    let out = fixpoint(&["certify", "--map", "example1", "--global-uniform"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let children = v["certificate"]["children"].as_array().unwrap();
    let global = children.iter().find(|c| c["check"] == "global-uniform").unwrap();
    assert_eq!(global["verdict"], "refuted");
    // everything else still passes
    assert!(children
        .iter()
        .filter(|c| c["check"] != "global-uniform")
        .all(|c| c["verdict"] == "pass"));
}

#[test]
fn certify_translation_warns_but_passes() {
    let out = fixpoint(&["certify", "--map", "zoo:nonexample-translation", "--region", "0:10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("no bounded orbit"));
    let v = json(&out);
    assert_eq!(v["orbit_probe"]["bounded"], false);
    assert!(v["warnings"][0].as_str().unwrap().contains("no bounded orbit"));
}

#[test]
fn certify_with_expression_triple() {
    let out = fixpoint(&[
        "certify",
        "--map",
        "expr:x/4",
        "--region",
        "0:2",
        "--phi",
        "0.25^n*abs(x-y)",
        "--phi-limit",
        "0",
        "--psi",
        "linear:1/4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = fixpoint(&[
        "certify",
        "--map",
        "expr:x/4",
        "--region",
        "0:2",
        "--phi",
        "power:1/4",
        "--psi",
        "linear:1/4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // a family that is too small is refuted
    let out = fixpoint(&[
        "certify",
        "--map",
        "expr:x/4",
        "--region",
        "0:2",
        "--phi",
        "power:1/8",
        "--psi",
        "linear:1/4",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn envelope_tables() {
    let out = fixpoint(&["envelope", "--psi", "linear:1/3", "--region", "0:10", "--grid", "21"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r["psi"] == r["g"]));

    let out = fixpoint(&[
        "envelope",
        "--psi",
        "piecewise:0.9*t;@1:0.5*t",
        "--region",
        "0:3",
        "--grid",
        "31",
    ]);
    let v = json(&out);
    for r in v["rows"].as_array().unwrap() {
        let t = r["t"].as_f64().unwrap();
        let exact = if t < 1.0 { 0.9 * t } else { 0.9f64.max(0.5 * t) };
        assert!((r["g"].as_f64().unwrap() - exact).abs() <= 1e-4, "t={t}");
    }

    let out = fixpoint(&["envelope", "--psi", "expr:t", "--format", "csv"]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,psi,g\n"));
    assert!(text.contains("# envelope-properties/g-below-identity,refuted"));
}

#[test]
fn zoo_listing() {
    let out = fixpoint(&["zoo", "list"]);
    assert_eq!(code(&out), 0);
    let tags: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["tag"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        tags,
        [
            "banach",
            "rakotch",
            "boyd-wong",
            "ciric",
            "kirk-asymptotic",
            "example1",
            "nonexample-translation"
        ]
    );
    let out = fixpoint(&["zoo", "describe", "banach:1/4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["class_condition"]["verdict"], "pass");
    assert_eq!(v["map"], "0.25 * x");
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--out", &p]);
    let out = fixpoint(&full);
    assert!(out.stdout.is_empty());
    std::fs::read(&path).unwrap()
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["certify", "--map", "example1", "--region", "0:10", "--global-uniform"][..],
        &[
            "solve",
            "--map",
            "zoo:rakotch",
            "--x0",
            "3",
            "--tol",
            "1e-6",
            "--eps",
            "1e-1",
        ][..],
        &["envelope", "--psi", "table:0=0,1=0.5,2=1.5", "--format", "csv"][..],
    ] {
        let a = run_to(dir.path(), "a", args);
        let b = run_to(dir.path(), "b", args);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["certify", "--map", "example1", "--format", "json"];
    let base = run_to(dir.path(), "base", &args);
    let with_env = |seed: &str, extra: &[&str]| {
        let path = dir.path().join(format!("env-{seed}-{}", extra.len()));
        let p = path.to_str().unwrap().to_string();
        let mut full: Vec<&str> = args.to_vec();
        full.extend(extra);
        full.extend(["--out", &p]);
        let out = Command::new(env!("CARGO_BIN_EXE_fixpoint"))
            .args(&full)
            .env("FIXPOINT_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        std::fs::read(&path).unwrap()
    };
    let env_seeded = with_env("12345", &[]);
    assert_ne!(base, env_seeded);
    assert_eq!(
        env_seeded,
        run_to(dir.path(), "flag", &[&args[..], &["--seed", "12345"]].concat())
    );
    // the flag beats the environment
    let default_seed = fixpoint_lab::DEFAULT_SEED.to_string();
    assert_eq!(with_env("12345", &["--seed", &default_seed]), base);
}

#[test]
fn config_file_layers_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# shared\nmap = zoo:banach:1/2\nx0 = 8\n\n[solve]\ntol = 1e-6\n[certify]\nregion = 0:4\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = fixpoint(&["solve", "--config", cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["tol"].as_f64(), Some(1e-6));
    assert_eq!(v["x0"][0].as_f64(), Some(8.0));

    let out = fixpoint(&["solve", "--config", cfg, "--tol", "1e-10"]);
    assert_eq!(json(&out)["tol"].as_f64(), Some(1e-10));

    let out = fixpoint(&["certify", "--config", cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["region"], "[0, 4]");

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "[solve]\nspeed = 3\n").unwrap();
    assert_eq!(code(&fixpoint(&["solve", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&fixpoint(&["solve", "--config", "/nonexistent/run.conf"])), 2);
}

#[test]
fn solve_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = fixpoint(&[
        "solve",
        "--map",
        "example1",
        "--x0",
        "1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x_n,step_dist,tail_diam"));
    let row1: Vec<f64> = lines
        .nth(1)
        .unwrap()
        .split(',')
        .skip(1)
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(row1[0], 1.0 / 3.0);
    assert_eq!(row1[1], 1.0 - 1.0 / 3.0);
}
