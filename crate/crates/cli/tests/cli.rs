use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ldp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldp")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn discretize_uniform_writes_one_partition_per_depth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"space": {"type": "interval", "lo": 0, "hi": 1}, "mu": {"type": "uniform", "lo": 0, "hi": 1}, "depth": 3}"#);
    let out = dir.path().join("out");
    let o = ldp(&["discretize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for m in 1..=3 {
        assert!(out.join(format!("partition_m{m}.json")).exists());
        let masses = std::fs::read_to_string(out.join(format!("measure_m{m}.csv"))).unwrap();
        let total: f64 = column(&masses, "mass").iter().map(|x| x.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gaussian_bad_cells_carry_the_reported_tails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mu": {"type": "gaussian", "mean": 0, "sd": 1}, "depth": 2}"#);
    let out = dir.path().join("out");
    let o = ldp(&["discretize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let summary = stdout(&o);
    let bad = column(&summary, "bad_mass");
    let tail = column(&summary, "tail");
    for (b, t) in bad.iter().zip(&tail) {
        assert!((b.parse::<f64>().unwrap() - t.parse::<f64>().unwrap()).abs() < 1e-15);
    }
    // K_1 = [-1.5, 1.5]: tail 2·Φ̄(1.5).
    assert!((tail[0].parse::<f64>().unwrap() - 0.13361440253771614).abs() < 1e-15);
}

#[test]
fn malformed_json_is_a_spec_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\"mu\": ");
    let o = ldp(&["entropy", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spec_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"mu": {"type": "gaussian", "mean": 0, "sd": -1}, "nu": {"type": "gaussian", "mean": 0, "sd": 1}, "depth": 2}"#);
    let o = ldp(&["entropy", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));
    let cfg = write_config(dir.path(), r#"{"mu": {"type": "gaussian", "mean": 0, "sd": 1}, "depth": {"min": 2, "max": 1}}"#);
    let o = ldp(&["discretize", "--config", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("depth"));
}

#[test]
fn entropy_of_a_measure_against_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mu": {"type": "exponential", "rate": 1}, "nu": {"type": "exponential", "rate": 1}, "depth": 3}"#);
    let o = ldp(&["entropy", "--config", &cfg]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "H_m"), vec!["0", "0", "0"]);
}

#[test]
fn gaussian_entropy_ladder_rises_toward_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"mu": {"type": "gaussian", "mean": 1, "sd": 1}, "nu": {"type": "gaussian", "mean": 0, "sd": 1}, "depth": 4}"#);
    let o = ldp(&["entropy", "--config", &cfg]);
    let h: Vec<f64> = column(&stdout(&o), "H_m").iter().map(|x| x.parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[0] <= w[1]));
    assert!((h[3] - 0.5).abs() < 0.01);
}

#[test]
fn singular_pair_reports_inf_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"mu": {"type": "finite", "points": [0, 1], "weights": [0.5, 0.5]},
            "nu": {"type": "finite", "points": [0, 2], "weights": [0.5, 0.5]}, "depth": 2}"#,
    );
    let o = ldp(&["entropy", "--config", &cfg]);
    assert_eq!(column(&stdout(&o), "H_m"), vec!["inf", "inf"]);
}

#[test]
fn bl_dist_caps_at_two_and_reports_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"mu": {"type": "finite", "points": [0], "weights": [1]}, "nu": {"type": "finite", "points": [3], "weights": [1]}}"#,
    );
    assert_eq!(stdout(&ldp(&["bl-dist", "--config", &cfg])), "2\n");
    let o = ldp(&["bl-dist", "--config", &cfg, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["distance"], 2.0);
    assert!(v["gap"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn rate_requires_a_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"mu": {"type": "finite", "points": [0, 1], "weights": [0.5, 0.5]},
        "set": {"center": {"type": "finite", "points": [0, 1], "weights": [0.25, 0.75]}, "radius": 0.05},
        "n_list": [20, 40], "reps": 400}"#;
    let cfg = write_config(dir.path(), body);
    assert_eq!(ldp(&["rate", "--config", &cfg]).status.code(), Some(2));
    let a = ldp(&["rate", "--config", &cfg, "--seed", "3"]);
    let b = ldp(&["rate", "--config", &cfg, "--seed", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
}

#[test]
fn verify_default_passes_and_is_byte_identical() {
    let a = ldp(&["verify"]);
    let b = ldp(&["verify"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ldp_cli::commands::verify::CHECKS);
}

#[test]
fn planted_partition_defect_fails_the_structural_check() {
    let cfg = fixture("planted_defect.json");
    let o = ldp(&["verify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("lemma-3.1,")).unwrap();
    assert!(line.starts_with("lemma-3.1,fail,"), "{line}");
    assert!(line.contains("disjoint"));
}

#[test]
fn guard_exceeding_sample_size_is_a_skip() {
    let mut cfg: serde_json::Value = serde_json::from_str(ldp_cli::commands::verify::DEFAULT_CONFIG).unwrap();
    cfg["finite"]["mu"] = serde_json::json!({"type": "finite", "points": [0, 1, 2, 3, 4, 5], "weights": [0.1, 0.1, 0.2, 0.2, 0.2, 0.2]});
    cfg["finite"]["nu"] = serde_json::json!({"type": "finite", "points": [0, 1], "weights": [0.5, 0.5]});
    cfg["finite"]["n"] = serde_json::json!(1000);
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &cfg.to_string());
    let o = ldp(&["verify", "--config", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for c in report["checks"].as_array().unwrap() {
        if c["name"].as_str().unwrap().starts_with("prop-") {
            assert_eq!(c["status"], "skip");
        }
    }
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = ldp(&["verify", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out).unwrap().contains("lemma-5.2"));
}
