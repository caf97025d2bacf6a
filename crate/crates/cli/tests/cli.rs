use std::process::{Command, Output};

fn rising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_names_every_policy() {
    let out = rising(&["list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "red_ucb_det",
        "red_ucb",
        "rexp3",
        "klucb",
        "sw_ucb",
        "sw_klucb",
        "sw_ts",
        "ser4",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn run_writes_csv_with_config_header() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = rising(&[
        "run",
        "--instance",
        "thm3_a",
        "--policy",
        "red_ucb",
        "-T",
        "200",
        "--runs",
        "3",
        "--seed",
        "5",
        "--epsilon",
        "0.125",
        "--out",
        out_dir,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let regret = std::fs::read_to_string(dir.path().join("thm3_a_red_ucb_200_3.csv")).unwrap();
    let mut lines = regret.lines();
    assert_eq!(lines.next(), Some("# instance: thm3_a"));
    assert!(regret.contains("epsilon=0.125"));
    assert!(regret.contains(r#""epsilon":0.125"#));
    let rows: Vec<&str> = regret.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "t,mean_regret,ci_half,policy,instance,runs,seed");
    assert_eq!(rows.len(), 201);
    assert!(rows[200].starts_with("200,"));
    assert!(rows[200].ends_with(",red_ucb,thm3_a,3,5"));
    let pulls = std::fs::read_to_string(dir.path().join("thm3_a_red_ucb_200_3_pulls.csv")).unwrap();
    let total: f64 = pulls
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("arm"))
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 200.0).abs() < 1e-9);
}

#[test]
fn runs_are_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let read = |workers: &str| {
        let sub = dir.path().join(workers);
        let out = rising(&[
            "run",
            "--instance",
            "random",
            "--arms",
            "3",
            "--policy",
            "sw_ts",
            "-T",
            "300",
            "--runs",
            "4",
            "--workers",
            workers,
            "--out",
            sub.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let text = std::fs::read_to_string(sub.join("random3_s0_sw_ts_300_4.csv")).unwrap();
        text.lines()
            .filter(|l| !l.starts_with("# workers"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"instance":"crossing","policy":"sw_ucb","horizon":100,"runs":2,
            "policies":[{"name":"sw_ucb","tau":7}]}"#,
    )
    .unwrap();
    let out = rising(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--runs",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("crossing_sw_ucb_100_1.csv")).unwrap();
    assert!(text.contains(r#""tau":7"#));
}

#[test]
fn bad_input_exits_with_two() {
    let unknown = rising(&["run", "--instance", "nope", "-T", "10"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_eps = rising(&[
        "run",
        "--instance",
        "thm3_a",
        "-T",
        "10",
        "--epsilon",
        "0.7",
    ]);
    assert_eq!(bad_eps.status.code(), Some(2));
    let odd = rising(&["lb-verify", "--theorem", "thm3", "-T", "7"]);
    assert_eq!(odd.status.code(), Some(2));
    let det_noisy = rising(&[
        "run",
        "--instance",
        "thm4_a",
        "--policy",
        "red_ucb_det",
        "-T",
        "100",
    ]);
    assert_eq!(det_noisy.status.code(), Some(2));
}

#[test]
fn lb_verify_reports_floor() {
    let out = rising(&[
        "lb-verify",
        "--theorem",
        "thm3",
        "--policy",
        "klucb",
        "-T",
        "640",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("floor=10.0000"));
    assert!(text.contains("HOLDS"));
}

#[test]
fn upsilon_table() {
    let out = rising(&[
        "upsilon",
        "--instance",
        "thm5_a",
        "-T",
        "64",
        "--q",
        "1",
        "--family",
        "poly",
        "--rate",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("q\tupsilon\tbound"));
    assert!(text.lines().any(|l| l.starts_with("V_T\t")));
}
