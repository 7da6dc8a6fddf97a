use llgsp_core::io::{parse_config_with_overrides, read_snapshot, run_command, EXIT_CLEAN};

const CONFIG: &str = r#"
dim = 2
lengths = [1.0, 0.5]
points = [16, 8]
modes = [8, 4]
alpha = 0.5
theta = 0.5
t_end = 0.02
dt = 1e-4
initial = "random_lowmode"
spin_amplitude = 0.3
anisotropy = "uniaxial"
seed = 4
"#;

fn config(dir: &std::path::Path, extra: &[String]) -> llgsp_core::io::RunConfig {
    let mut o = vec![format!("output_dir = {:?}", dir.to_str().unwrap())];
    o.extend_from_slice(extra);
    parse_config_with_overrides(CONFIG, &o).unwrap()
}

#[test]
fn restart_from_snapshot_continues_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let full = config(&tmp.path().join("full"), &["snapshot_stride = 100".into()]);
    assert_eq!(run_command(&full).unwrap().exit_code, EXIT_CLEAN);

    let half = full.output_dir.join("snapshots/step_00000100");
    let resumed = config(
        &tmp.path().join("resumed"),
        &[
            "initial = \"snapshot\"".into(),
            format!("initial_snapshot = {:?}", half.to_str().unwrap()),
            "t_end = 0.01".into(),
        ],
    );
    assert_eq!(run_command(&resumed).unwrap().exit_code, EXIT_CLEAN);

    let a = read_snapshot(&full.output_dir.join("snapshots/step_00000200_u.meta")).unwrap();
    let b = read_snapshot(&resumed.output_dir.join("snapshots/step_00000100_u.meta")).unwrap();
    let worst = a
        .field
        .values()
        .iter()
        .zip(b.field.values())
        .flat_map(|(x, y)| (0..3).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "restart deviates by {worst}");
}

#[test]
fn diagnostics_csv_has_fixed_columns_and_full_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), &["diagnostics_stride = 50".into()]);
    run_command(&cfg).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("diagnostics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,exchange,aniso,demag,total_energy,l2_u,l2_s,h2spec_u,h2spec_s,sphere_drift,s_l2_delta"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == 11));
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for (t, want) in times.iter().zip([0.0, 0.005, 0.01, 0.015, 0.02]) {
        assert!((t - want).abs() < 1e-12);
    }
    for field in text.lines().nth(1).unwrap().split(',') {
        let digits = field.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(digits.len(), 17, "{field}");
    }
}
