use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gdtau"));
    c.env_remove("GDTAU_OUT_DIR");
    c
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("the binary runs")
}

const SMALL: &str = r#"
[symbol]
family = "rational"
params = [0.3, 0.6]

[run]
n_min = 1
n_max = 3
times = [0.2, 0.0, 0.05]

[[grid]]
time = 1
from = -0.4
to = 0.4
steps = 3
"#;

#[test]
fn verify_on_the_bundled_rational_config_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify"], &bundled("rational.toml"), dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    let names: Vec<&str> = table.lines().skip(1).map(|l| l.rsplitn(4, ',').last().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len(), "duplicate invariant rows");
    for m in ["gradedpoly", "laurent", "symbols", "toeplitz", "tau", "factorization", "algebro", "cli"] {
        assert!(names.iter().any(|n| n.starts_with(m)), "{m} missing");
    }
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn tau_with_malformed_times_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMALL.replace("times = [0.2, 0.0, 0.05]", "times = [0.2, 0.1]")).unwrap();
    let out = run(&["tau"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("CONFIG\t"), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_and_bad_tolerance_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SMALL.replace("[run]", "[run]\nspeed = 3")).unwrap();
    assert_eq!(run(&["tau"], &cfg, dir.path()).status.code(), Some(2));
    std::fs::write(&cfg, SMALL).unwrap();
    let out = run(&["tau", "--tol", "-1"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tau_csv_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["tau", "--threads", "3"], &cfg, &a).status.code(), Some(0));
    assert_eq!(run(&["tau", "--threads", "1"], &cfg, &b).status.code(), Some(0));
    let ta = std::fs::read(a.join("tau.csv")).unwrap();
    let tb = std::fs::read(b.join("tau.csv")).unwrap();
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    // 3 grid points, N = 1..3 plus the stable row
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    assert!(text.lines().next().unwrap().starts_with("t1,t3,N,"));
    assert!(text.contains(",inf,"));
}

#[test]
fn converge_delta_column_decays() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["converge"], &bundled("rational.toml"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    let deltas: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .filter(|d: &f64| *d > 1e-13)
        .collect();
    assert!(deltas.len() >= 3);
    for w in deltas.windows(2) {
        assert!(w[1] < 0.5 * w[0], "{deltas:?}");
    }
}

#[test]
fn factorize_and_spectral_write_coefficient_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("covering.toml");
    assert_eq!(run(&["factorize"], &cfg, dir.path()).status.code(), Some(0));
    assert_eq!(run(&["spectral"], &cfg, dir.path()).status.code(), Some(0));
    for f in ["t_minus.csv", "t_plus.csv", "c.csv", "b.csv", "report.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let c = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(c.starts_with("k,row,col,re,im"));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("degree table"));
    // spectral needs a curve, which the rational family lacks
    let out = run(&["spectral"], &bundled("rational.toml"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let env_out = dir.path().join("from_env");
    let out = bin()
        .args(["factorize", "--config"])
        .arg(&cfg)
        .env("GDTAU_OUT_DIR", &env_out)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_out.join("report.txt").exists());
}
