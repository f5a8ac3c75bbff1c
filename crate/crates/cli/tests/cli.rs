use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qobs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qobs"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("spawn qobs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn manifest_reruns_to_identical_tables() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("first");
    let out = qobs(&["clock", "--sigma", "0.2", "--energies", "0,1,3", "--steps", "50"], &first);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = first.join("clock.manifest");
    let second = root.path().join("second");
    let out = qobs(&["clock", "--config", manifest.to_str().unwrap()], &second);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["clock.csv", "clock_summary.csv", "clock.manifest"] {
        assert_eq!(read(&first, name), read(&second, name), "{name}");
    }
}

#[test]
fn flags_override_config_file() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("run.conf");
    fs::write(&cfg, "# comment\nhbar=2\nh0=1.5\n").unwrap();
    let out = qobs(&["tunnel", "--config", cfg.to_str().unwrap(), "--h0", "0.5"], root.path());
    assert!(out.status.success());
    let manifest = read(root.path(), "tunnel.manifest");
    assert!(manifest.lines().any(|l| l == "hbar=2"));
    assert!(manifest.lines().any(|l| l == "h0=0.5"));
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("bad.conf");
    fs::write(&cfg, "hbar=1\nplanck=2\n").unwrap();
    let dir = root.path().join("out");
    let out = qobs(&["tunnel", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists());
}

#[test]
fn invalid_values_exit_with_validation_code() {
    let root = tempfile::tempdir().unwrap();
    for args in [
        &["tunnel", "--hbar", "-1"][..],
        &["tunnel", "--mu", "abc"],
        &["network", "--mode", "teleport"],
        &["cosmo", "--potential", "constant:-1"],
        &["sweep", "h0=1:2"],
        &["frobnicate"],
    ] {
        let dir = root.path().join("x");
        let out = qobs(args, &dir);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!dir.exists(), "{args:?} wrote output");
    }
}

#[test]
fn missing_config_file_is_an_io_error() {
    let root = tempfile::tempdir().unwrap();
    let out = qobs(&["clock", "--config", "/nonexistent/qobs.conf"], root.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn csv_layout() {
    let root = tempfile::tempdir().unwrap();
    assert!(qobs(&["tunnel"], root.path()).status.success());
    let csv = read(root.path(), "tunnel.csv");
    assert!(csv.ends_with("\r\n"));
    let mut lines = csv.split("\r\n");
    assert_eq!(lines.next().unwrap(), "hbar,mu,j0,h0,lambda,T_closed,T_quadrature,T_current_ratio");
    let row = lines.next().unwrap();
    assert!(row.starts_with("1.0000000000000000e0,"), "{row}");
}

#[test]
fn output_directory_from_environment() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_qobs"))
        .arg("tunnel")
        .env("QOBS_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("tunnel.csv").exists());
}

#[test]
fn network_modes_write_tables() {
    let root = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["network", "--mode", "gauge-check", "--trials", "5"], "network_gauge.csv"),
        (&["network", "--mode", "rolldown", "--n", "16", "--trials", "10"], "network_rolldown.csv"),
        (&["network", "--mode", "entropy", "--n", "6", "--steps", "500"], "network_entropy.csv"),
    ];
    for (args, file) in cases {
        let out = qobs(args, root.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(read(root.path(), file).lines().count() > 1);
    }
    let rolldown = read(root.path(), "network_rolldown.csv");
    for row in rolldown.lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[5], "1", "monotone flag in {row}");
    }
}

#[test]
fn plot_rejects_single_point() {
    let root = tempfile::tempdir().unwrap();
    let csv = root.path().join("one.csv");
    fs::write(&csv, "x,y\r\n1,2\r\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qobs"))
        .args(["plot", "--x", "x", "--y", "y", "--input"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
