use std::path::Path;
use std::process::{Command, Output};

fn hlmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlmetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

#[test]
fn geodesic_json_and_curve_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("curve.csv");
    let out = hlmetric(&[
        "geodesic",
        "--domain",
        "half_plane",
        "--weight",
        "reciprocal_dist",
        "--from",
        "0,1",
        "--to",
        "0,2.718281828459045",
        "--h",
        "0.02",
        "--curve",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert_eq!(v["resolution"].as_f64().unwrap(), 0.02);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1"));
    assert_eq!(lines.next(), Some("0,1"));
    assert_eq!(text.lines().last(), Some("0,2.718281828459045"));

    // The written curve reads back and integrates to the reported value.
    let out = hlmetric(&[
        "integral",
        "--domain",
        "half_plane",
        "--weight",
        "reciprocal_dist",
        "--curve",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let w = json(&out.stdout);
    assert!((w["integral"].as_f64().unwrap() - v["value"].as_f64().unwrap()).abs() < 1e-7);
}

#[test]
fn geodesic_negative_coordinates_and_raw_lattice() {
    let out = hlmetric(&[
        "geodesic", "--domain", "l_shape", "--weight", "unit", "--from", "-0.5,-0.5", "--to", "0.5,0.25",
        "--raw",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    let exact = 0.5f64.sqrt() + 0.3125f64.sqrt();
    let value = v["value"].as_f64().unwrap();
    assert!(value >= exact && value < 1.09 * exact, "{value}");
    assert_eq!(v["refined"], false);
}

#[test]
fn geodesic_bad_arguments_exit_2() {
    for args in [
        vec!["geodesic", "--domain", "disk", "--weight", "unit", "--from", "0,0", "--to", "0.1,0"],
        vec!["geodesic", "--domain", "unit_disk", "--weight", "unit", "--from", "0,0,0", "--to", "0.1,0"],
        vec!["geodesic", "--domain", "unit_ball:5", "--weight", "unit", "--from", "0,0", "--to", "0.1,0"],
        vec!["geodesic", "--domain", "unit_disk", "--weight", "unit", "--from", "2,0", "--to", "0.1,0"],
        vec!["frobnicate"],
    ] {
        let out = hlmetric(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn condition_report() {
    let out = hlmetric(&[
        "condition", "--domain", "unit_disk", "--weight", "unit", "--majorant", "power:1", "--pairs", "12",
        "--seed", "4", "--h", "0.02",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    // Convex domain, unit weight, φ(t) = t: every ratio is 1.
    assert!((v["m_observed"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["pairs_tested"].as_u64().unwrap(), 12);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL_SUITE: &str = r#"
seed = 5

[samples]
points = 150
pairs = 150

[[instance]]
name = "unit_ball_half"
theorem = "unit_ball"
domain = { kind = "unit_disk" }
majorant = { kind = "power", alpha = 0.5 }
mapping = { kind = "power_alpha", alpha = 0.5 }

[[instance]]
name = "log_negative_control"
theorem = "converse_strong"
domain = { kind = "unit_disk" }
weight = { kind = "dist" }
majorant = { kind = "power", alpha = 0.5 }
mapping = { kind = "log_branch" }
samples = { refined_clearance = 1e-5 }

[[instance]]
name = "curve"
theorem = "image_curve"
domain = { kind = "unit_disk" }
mapping = { kind = "monomial", k = 2 }
curve = [[0.0, 0.0], [0.5, 0.0]]
"#;

#[test]
fn verify_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "suite.toml", SMALL_SUITE);
    let out_dir = dir.path().join("out");
    let out = hlmetric(&["verify", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut rows = summary.lines();
    assert_eq!(rows.next(), Some("theorem,left,right,slack,pass,status,instance"));
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("unit_ball_forward,"));
    assert!(rows[1].starts_with("unit_ball_converse,"));
    assert!(rows[2].contains(",hypothesis_unmet,log_negative_control"));
    assert!(rows[3].starts_with("image_curve,0.25,"));

    let unit = json(&std::fs::read(out_dir.join("01_unit_ball_half.json")).unwrap());
    assert_eq!(unit["seed"], 5);
    let reports = unit["reports"].as_array().unwrap();
    assert_eq!(reports[0]["constant_label"], "4/alpha");
    assert_eq!(reports[1]["constant_label"], "2/alpha");
    // C = sup (1 − |z|)^{1/2} |f′| = α, reached along the real axis.
    let c = reports[1]["left"].as_f64().unwrap();
    assert!((c - 0.5).abs() < 1e-6, "{c}");
    assert!(out_dir.join("02_log_negative_control.json").exists());
    assert!(out_dir.join("03_curve.json").exists());
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "suite.toml", SMALL_SUITE);
    let mut runs = Vec::new();
    for tag in ["a", "b"] {
        let out_dir = dir.path().join(tag);
        let out = hlmetric(&["verify", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success());
        let mut files: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        runs.push(
            files
                .iter()
                .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out_arg = out_dir.to_str().unwrap();

    let invalid = [
        "this is not toml",
        "seed = 1",
        &SMALL_SUITE.replace("theorem = \"image_curve\"", "theorem = \"lemma_9\""),
        &SMALL_SUITE.replace("alpha = 0.5 }\nmapping = { kind = \"power_alpha\"", "alpha = 1.0 }\nmapping = { kind = \"power_alpha\""),
        &SMALL_SUITE.replace("name = \"curve\"", "name = \"unit_ball_half\""),
    ];
    for (i, text) in invalid.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.toml"), text);
        let out = hlmetric(&["verify", &cfg, "--out", out_arg]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = dir.path().join("missing.toml");
    let out = hlmetric(&["verify", missing.to_str().unwrap(), "--out", out_arg]);
    assert_eq!(out.status.code(), Some(2));

    // The segment crosses the hole, so the instance cannot be evaluated and
    // the run reports failure.
    let unfinished = r#"
        [[instance]]
        name = "through_hole"
        theorem = "image_curve"
        domain = { kind = "annulus", inner = 0.5, outer = 2.0 }
        mapping = { kind = "identity" }
        curve = [[-1.0, 0.0], [1.0, 0.0]]
    "#;
    let cfg = write(dir.path(), "hole.toml", unfinished);
    let out = hlmetric(&["verify", &cfg, "--out", out_arg]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&std::fs::read(out_dir.join("01_through_hole.json")).unwrap());
    assert!(report["error"].as_str().unwrap().contains("outside the domain"));
    assert!(std::fs::read_to_string(out_dir.join("summary.csv")).unwrap().contains("error"));
}
