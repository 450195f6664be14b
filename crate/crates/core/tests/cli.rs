use std::path::Path;
use std::process::{Command, Output};

fn torus_cm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-cm"))
        .args(args)
        .env("TORUS_CM_OUT", out)
        .output()
        .expect("binary runs")
}

const MIXTURE: &str = r#"{"pmf":{"1":0.5,"3":0.5}}"#;

#[test]
fn rho_prints_extinction_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = torus_cm(&["rho", "--dist", MIXTURE], dir.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.185185185185");
    let out = torus_cm(&["rho", "--dist", r#"{"poisson":{"mu":2.0}}"#], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.203187869980");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(torus_cm(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(torus_cm(&["frobnicate"], dir.path()).status.code(), Some(1));
    let bad = torus_cm(&["rho", "--dist", r#"{"pmf":{"1":0.4}}"#], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let missing = dir.path().join("nope.csv");
    let io = torus_cm(&["analyze", missing.to_str().unwrap()], dir.path());
    assert_eq!(io.status.code(), Some(2));
}

#[test]
fn generate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--dist", MIXTURE, "--d", "1", "--k", "4", "--m", "50", "--seed", "9"];
    assert!(torus_cm(&args, dir.path()).status.success());
    let edges = dir.path().join("edges.csv");
    let text = std::fs::read_to_string(&edges).unwrap();
    assert_eq!(text.lines().next(), Some("u,v"));
    let out = torus_cm(&["analyze", edges.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn zero_degrees_give_no_edges() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--dist", r#"{"pmf":{"0":1.0}}"#, "--d", "2", "--k", "3", "--m", "4"];
    assert!(torus_cm(&args, dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn scenario_output_is_reproducible() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let args = [
            "giant", "--dist", MIXTURE, "--d", "1", "--k", "5", "--m", "400", "--replicates", "3",
            "--seed", "11", "--threads", "1",
        ];
        let out = torus_cm(&args, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.path().join("giant.csv")).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# schema torus-cm/giant v1:"));
}

#[test]
fn bounds_defaults_to_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = torus_cm(&["bounds"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a_n,b_n,c_n,raw_b_n,combined,combined_failure_term"));
    let a_n: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((a_n - 0.999_993_180_150_690_4).abs() < 1e-12);
}
