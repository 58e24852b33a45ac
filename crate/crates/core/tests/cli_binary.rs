use std::process::Command;

fn mixlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixlab"))
}

#[test]
fn help_exits_cleanly() {
    let out = mixlab().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("--experiment"));
}

#[test]
fn bad_input_exits_one() {
    let out = mixlab()
        .args([
            "--experiment",
            "joint",
            "--n",
            "10",
            "--degrees",
            "regular:3",
            "--alpha",
            "1.5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    let out = mixlab()
        .args(["--experiment", "joint", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn joint_run_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab()
        .args([
            "--experiment",
            "joint",
            "--n",
            "400",
            "--degrees",
            "mix:2x200,3x200",
            "--alpha",
            "0.05",
            "--beta",
            "0.5,1,2,4",
            "--env-samples",
            "5",
            "--seed",
            "7",
            "--threads",
            "2",
            "--output-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max_dev="), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("joint_n400_a0.05_s7.csv")).unwrap();
    assert_eq!(mixlab::experiments::ExperimentReport::parse_csv(&csv).unwrap().len(), 4);
    assert!(dir.path().join("joint_n400_a0.05_s7.json").exists());
}

#[test]
fn diagnostics_rows_per_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let out = mixlab()
        .args([
            "--experiment",
            "diagnostics",
            "--degrees",
            "mix:2x100,3x100",
            "--replicates",
            "20",
            "--output-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("diagnostics_n200_a0.01_s0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(mixlab::stationary::DIAGNOSTIC_HEADER));
    assert_eq!(lines.count(), 20);
}
