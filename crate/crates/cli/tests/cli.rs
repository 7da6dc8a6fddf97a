use std::path::Path;
use std::process::Command;

const BASE: &str = r#"
dim = 1
lengths = [1.0]
points = [32]
modes = [16]
alpha = 1.0
theta = 0.5
t_end = 0.01
dt = 1e-4
initial = "cosine_tilt"
anisotropy = "uniaxial"
"#;

fn llgsp(dir: &Path, args: &[&str]) -> std::process::Output {
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, BASE).unwrap();
    Command::new(env!("CARGO_BIN_EXE_llgsp"))
        .args(&args[..1])
        .arg(&cfg)
        .args(&args[1..])
        .output()
        .unwrap()
}

#[test]
fn run_exits_clean_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(dir.path(), &["run", "--output-dir", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with(
        "t,exchange,aniso,demag,total_energy,l2_u,l2_s,h2spec_u,h2spec_s,sphere_drift,s_l2_delta"
    ));
    assert_eq!(csv.lines().count(), 102);
    assert!(out.join("snapshots/step_00000100_u.bin").exists());
    assert!(out.join("run.log").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let out = dir.path().join(name);
        let o = llgsp(
            dir.path(),
            &[
                "run",
                "--output-dir",
                out.to_str().unwrap(),
                "--override",
                "initial=\"random_lowmode\"",
                "--seed",
                "9",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
        (
            std::fs::read(out.join("diagnostics.csv")).unwrap(),
            std::fs::read(out.join("snapshots/step_00000100_s.bin")).unwrap(),
        )
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn oversized_step_is_rejected_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(
        dir.path(),
        &[
            "run",
            "--output-dir",
            out.to_str().unwrap(),
            "--override",
            "dt=1e-2",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn unsafe_step_blows_up_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(
        dir.path(),
        &[
            "run",
            "--output-dir",
            out.to_str().unwrap(),
            "--unsafe-dt",
            "--override",
            "alpha=0.02",
            "--override",
            "dt=2e-2",
            "--override",
            "t_end=20.0",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("t ="));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = llgsp(dir.path(), &["run", "--override", "alhpa=1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alhpa"));
}

#[test]
fn compat_check_passes_cosine_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(
        dir.path(),
        &[
            "compat-check",
            "--output-dir",
            out.to_str().unwrap(),
            "--override",
            "points=[64]",
            "--override",
            "modes=[32]",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(out.join("compat_report.txt")).unwrap();
    assert!(report.contains("verdict = \"passes order 1\""));
}

#[test]
fn oracle_compare_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(
        dir.path(),
        &["oracle-compare", "--output-dir", out.to_str().unwrap()],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(out.join("oracle_compare.csv").exists());
}

#[test]
fn convergence_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = llgsp(
        dir.path(),
        &[
            "convergence",
            "--output-dir",
            out.to_str().unwrap(),
            "--unsafe-dt",
            "--override",
            "convergence_dts=[1e-2, 5e-3, 2.5e-3, 1.25e-3]",
            "--override",
            "convergence_modes=[2, 3, 4, 6]",
            "--override",
            "t_end=0.1",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(out.join("convergence_time.csv").exists());
    assert!(out.join("convergence_space.csv").exists());
}
