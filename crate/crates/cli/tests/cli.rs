use std::process::Command;

fn sirpns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sirpns"))
}

#[test]
fn mesh_info_counts() {
    let out = sirpns().args(["mesh-info", "--nx", "2", "--ny", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("vertices: 12"), "{text}");
    assert!(text.contains("triangles: 12"), "{text}");
}

#[test]
fn missing_config_exits_one() {
    let out = sirpns().args(["run", "--config", "definitely-missing.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config not found"));
}

#[test]
fn unknown_flags_exit_two() {
    let out = sirpns().args(["run", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = sirpns().args(["verify", "--suite", "everything"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_value_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "dt = -1\n").unwrap();
    let out = sirpns().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt must be positive"));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "[mesh]\nnx = 6\nny = 6\n[time]\nt_final = 0.1\n[run]\nsnapshot_every = 5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = sirpns()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--experiment", "exp3", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("monitor.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("t,min_S,max_S"));
    for step in [0, 5, 10] {
        assert!(out_dir.join(format!("snapshot_{step:06}.vtk")).exists());
    }
    let saved = std::fs::read_to_string(out_dir.join("run.cfg")).unwrap();
    assert!(saved.contains("experiment = exp3"));
}

#[test]
fn invariants_suite_passes() {
    let out = sirpns().args(["verify", "--suite", "invariants"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
}
