use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lab"));
    c.args(args);
    if let Some(t) = threads {
        c.env("LAB_THREADS", t);
    }
    c.output().expect("lab runs")
}

fn scratch(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("lab-cli-test-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    p
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = scratch("malformed");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "schema_version = 1\nexperiment = \"simplex\"\nscenario = \"flat-orthogonal-k1\"\ncolour = 1\n").unwrap();
    let out = dir.join("out");
    let o = lab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert!(!out.exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bundled_config_runs_and_writes_tables() {
    let out = scratch("simplex");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/simplex-flat-k1.toml");
    let o = lab(&["run", cfg, "--out", out.to_str().unwrap()], Some("2"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["simplex.csv", "simplex_limit.csv", "verdicts.csv", "config.toml", "summary.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert!(std::fs::read_to_string(out.join("summary.txt")).unwrap().ends_with("status pass\n"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn scenario_listing_is_stable() {
    let a = lab(&["scenarios"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, lab(&["scenarios"], None).stdout);
    assert!(String::from_utf8_lossy(&a.stdout).lines().any(|l| l.starts_with("product-H2xH2-Z2\t")));
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let out = scratch("threads");
    let o = lab(&["verify", "--out", out.to_str().unwrap()], Some("0"));
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}
