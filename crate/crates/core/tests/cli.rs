//! End-to-end tests of the command-line surface: flags, file formats, exit
//! codes and the JSON report schema.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_palatini-routh"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("palatini-routh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("tempdir");
    dir.join(name)
}

fn parse_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "report should parse: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn verify_schwarzschild_passes_with_schema_stable_report() {
    let out = bin()
        .args([
            "verify",
            "--metric",
            "schwarzschild",
            "--grid",
            "r=3..10:5,theta=0.5..2.5:3",
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert!(v["tool_version"].is_string());
    assert_eq!(v["command"], "verify");
    let points = v["points"].as_array().expect("points array");
    assert_eq!(points.len(), 15);
    let first = &points[0];
    assert_eq!(first["coords"].as_array().unwrap().len(), 4);
    let res = &first["residuals"][0];
    assert_eq!(res["name"], "einstein");
    assert!(res["max_abs"].as_f64().unwrap() < 1e-8);
    assert!(res["frobenius"].is_number());
    assert_eq!(res["pass"], Value::Bool(true));
    assert_eq!(v["summary"]["all_pass"], Value::Bool(true));
    assert_eq!(v["summary"]["total_points"], 15);
}

#[test]
fn verify_minkowski_is_exactly_flat() {
    let out = bin()
        .args(["verify", "--metric", "minkowski"])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert_eq!(v["summary"]["max_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn verify_perturbed_schwarzschild_fails_with_exit_1() {
    let out = bin()
        .args([
            "verify",
            "--metric",
            "perturbed_schwarzschild",
            "--grid",
            "r=3..10:5",
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(1));
    let v = parse_report(&out);
    assert_eq!(v["summary"]["all_pass"], Value::Bool(false));
    assert!(v["summary"]["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn usage_and_domain_errors_exit_2() {
    for args in [
        vec!["verify", "--metric", "kerr"],
        vec!["verify"],
        vec!["verify", "--metric", "schwarzschild", "--grid", "q=1..2:2"],
        vec!["verify", "--metric", "schwarzschild", "--nope", "1"],
        vec!["frobnicate"],
        vec!["verify", "--metric", "schwarzschild", "--mode", "magic"],
    ] {
        let out = bin().args(&args).output().expect("runs");
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
    let out = bin().output().expect("runs");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_file_exits_2() {
    let path = tmp("malformed.jsonl");
    std::fs::write(&path, "this is not json\n").unwrap();
    let out = bin()
        .args(["verify", "--input", path.to_str().unwrap()])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn reduce_identity_frames_gives_constant_eta_records() {
    let frames = tmp("identity_frames.jsonl");
    let mut lines = String::new();
    for i in 0..3 {
        let e = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let de = vec![vec![vec![0.0; 4]; 4]; 4];
        let rec = serde_json::json!({"x": [i as f64, 0.0, 0.0, 0.0], "e": e, "de": de});
        lines.push_str(&rec.to_string());
        lines.push('\n');
    }
    std::fs::write(&frames, lines).unwrap();
    let outfile = tmp("identity_metric.jsonl");
    let out = bin()
        .args([
            "reduce",
            "--frame-input",
            frames.to_str().unwrap(),
            "--out",
            outfile.to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&outfile).unwrap();
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let g = v["g"].as_array().unwrap();
        assert_eq!(g[0][0].as_f64().unwrap(), -1.0);
        assert_eq!(g[1][1].as_f64().unwrap(), 1.0);
        assert_eq!(g[0][1].as_f64().unwrap(), 0.0);
        for block in v["dg"].as_array().unwrap() {
            for row in block.as_array().unwrap() {
                for entry in row.as_array().unwrap() {
                    assert_eq!(entry.as_f64().unwrap(), 0.0);
                }
            }
        }
    }
}

#[test]
fn reconstruct_then_reduce_matches_fixture_jets() {
    let frames = tmp("schw_frames.jsonl");
    let out = bin()
        .args([
            "reconstruct",
            "--metric",
            "schwarzschild",
            "--grid",
            "r=4..8:6,theta=1.0..2.0:3",
            "--out",
            frames.to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert_eq!(v["command"], "reconstruct");
    assert!(v["summary"]["max_residual"].as_f64().unwrap() < 1e-9);

    // frame records carry e, de and gamma
    let first: Value = serde_json::from_str(
        std::fs::read_to_string(&frames)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert!(first["e"].is_array() && first["de"].is_array() && first["gamma"].is_array());

    let metrics = tmp("schw_reduced.jsonl");
    let out = bin()
        .args([
            "reduce",
            "--frame-input",
            frames.to_str().unwrap(),
            "--out",
            metrics.to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));

    // reduced records reproduce the analytic metric jets
    use palatini_routh::fixtures::get_fixture;
    use palatini_routh::numkit::DerivativeContract;
    let fixture = get_fixture("schwarzschild", &std::collections::HashMap::new()).unwrap();
    let text = std::fs::read_to_string(&metrics).unwrap();
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let x: Vec<f64> = v["x"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_f64().unwrap())
            .collect();
        let jet = fixture
            .jet_at(&x, &DerivativeContract::automatic())
            .unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let got = v["g"][mu][nu].as_f64().unwrap();
                assert!((got - jet.g_at(mu, nu)).abs() < 1e-10);
                for s in 0..4 {
                    let got = v["dg"][mu][nu][s].as_f64().unwrap();
                    assert!((got - jet.dg_at(mu, nu, s)).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn verify_frame_file_runs_all_four_families() {
    let frames = tmp("verify_frames.jsonl");
    let status = bin()
        .args([
            "reconstruct",
            "--metric",
            "schwarzschild",
            "--grid",
            "r=4..8:21,theta=1.2..1.8:7",
            "--out",
            frames.to_str().unwrap(),
        ])
        .status()
        .expect("runs");
    assert!(status.success());
    let out = bin()
        .args([
            "verify",
            "--input",
            frames.to_str().unwrap(),
            "--tol",
            "0.05",
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    let names: Vec<&str> = v["points"][0]["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        vec!["ricci", "compatibility", "torsion", "metricity"]
    );
}

#[test]
fn verify_metric_file_with_full_jets_is_exact() {
    use palatini_routh::fixtures::get_fixture;
    use palatini_routh::numkit::DerivativeContract;
    let fixture = get_fixture("schwarzschild", &std::collections::HashMap::new()).unwrap();
    let path = tmp("metric_records.jsonl");
    let mut lines = String::new();
    for i in 0..5 {
        let x = vec![0.0, 4.0 + i as f64, 1.3, 0.2];
        let jet = fixture
            .jet_at(&x, &DerivativeContract::automatic())
            .unwrap();
        let m = 4;
        let g: Vec<Vec<f64>> = (0..m)
            .map(|a| (0..m).map(|b| jet.g_at(a, b)).collect())
            .collect();
        let dg: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| (0..m).map(|s| jet.dg_at(a, b, s)).collect())
                    .collect()
            })
            .collect();
        let ddg: Vec<Vec<Vec<Vec<f64>>>> = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        (0..m)
                            .map(|s| (0..m).map(|t| jet.ddg_at(a, b, s, t)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let rec = serde_json::json!({"x": x, "g": g, "dg": dg, "ddg": ddg});
        lines.push_str(&rec.to_string());
        lines.push('\n');
    }
    std::fs::write(&path, lines).unwrap();
    let out = bin()
        .args(["verify", "--input", path.to_str().unwrap()])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert!(v["summary"]["max_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn lagrangian_densities_and_routhian_identity() {
    // flat spacetime: all densities zero
    let out = bin()
        .args(["lagrangian", "--metric", "minkowski"])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert_eq!(v["densities"]["palatini"].as_f64().unwrap(), 0.0);
    assert_eq!(v["densities"]["eh_first_order"].as_f64().unwrap(), 0.0);
    assert_eq!(v["densities"]["difference"].as_f64().unwrap(), 0.0);

    // unit sphere at theta = 0.9: density = kappa_2 * sin(theta) * 2
    let out = bin()
        .args(["lagrangian", "--metric", "sphere2", "--point", "0.9,0.3"])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    let pal = v["densities"]["palatini"].as_f64().unwrap();
    let eh = v["densities"]["eh_first_order"].as_f64().unwrap();
    assert!((pal - 2.0 * 0.9f64.sin()).abs() < 1e-12);
    assert!((pal - eh).abs() < 1e-12);

    // vacuum solution: density vanishes to tolerance
    let out = bin()
        .args([
            "lagrangian",
            "--metric",
            "schwarzschild",
            "--point",
            "0,5,1.2,0.3",
            "--tol",
            "1e-8",
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    assert!(v["densities"]["palatini"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn worker_pool_output_is_deterministic() {
    let run = |threads: &str| {
        let out = bin()
            .env("PALATINI_ROUTH_THREADS", threads)
            .args([
                "verify",
                "--metric",
                "schwarzschild",
                "--grid",
                "r=3..10:8,theta=0.5..2.5:4",
            ])
            .output()
            .expect("runs");
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn reconstruct_margin_clips_inadmissible_points() {
    let out = bin()
        .args([
            "reconstruct",
            "--metric",
            "schwarzschild",
            "--grid",
            "r=1.5..5:8",
            "--out",
            tmp("clipped.jsonl").to_str().unwrap(),
            "--margin",
            "0.01",
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(0));
    let v = parse_report(&out);
    // r = 1.5 (inside the horizon) and r = 2.0 (on it) are clipped
    assert_eq!(v["summary"]["total_points"], 6);
    assert!(v["points"][0]["coords"][1].as_f64().unwrap() >= 2.5);
}

#[test]
fn reconstruct_inside_horizon_reports_domain_error() {
    let out = bin()
        .args([
            "reconstruct",
            "--metric",
            "schwarzschild",
            "--grid",
            "r=0.5..1.5:3",
            "--out",
            tmp("bad_frames.jsonl").to_str().unwrap(),
        ])
        .output()
        .expect("runs");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("chart point"), "stderr: {err}");
}
