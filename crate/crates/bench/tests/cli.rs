use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fmi-bench"))
}

#[test]
fn cost_report_prints_the_model_table() {
    let out = bench().args(["cost-report", "--size", "1000000"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["2.89", "10.88", "151.76", "1576.20", "5.83"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn cost_report_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cost.csv");
    let out = bench()
        .args(["cost-report", "--size", "1000000", "--preset", "table4-derived", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("channel,"));
    let s3 = csv.lines().find(|l| l.starts_with("s3")).unwrap();
    assert!(s3.contains("16.70"), "{s3}");
}

#[test]
fn collective_run_writes_csv() {
    let out = bench()
        .args([
            "collective",
            "--channel",
            "redis",
            "--world-size",
            "3",
            "--collective",
            "allreduce",
            "--reps",
            "4",
            "--auto-services",
            "--no-latency",
            "--comm-name",
            "cli-allreduce",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("allreduce,redis,3,")).collect();
    assert_eq!(rows.len(), 4, "{text}");
    assert!(text.lines().any(|l| l.starts_with("# allreduce,redis,3,4,4,")), "{text}");
}

#[test]
fn bad_arguments_fail_cleanly() {
    for args in [
        &["pingpong", "--channel", "direct", "--size", "0", "--auto-services"][..],
        &["pingpong", "--channel", "direct", "--reps", "0", "--auto-services"][..],
        &["pingpong", "--channel", "pigeon"][..],
    ] {
        let out = bench().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
    }
}
