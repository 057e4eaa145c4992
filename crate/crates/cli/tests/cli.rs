use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ximsis_core::{simgen, SimScenario};

fn ximsis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ximsis"))
        .args(args)
        .env_remove("XIMSIS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_example_csv(path: &Path, sc: &SimScenario, stream: u64) {
    let c = simgen::scenario_censoring_bound(sc).unwrap();
    let sample = simgen::generate_replication(sc, c, stream).unwrap();
    let mut text = String::from("time,status");
    for k in 0..sc.p {
        write!(text, ",X{}", k + 1).unwrap();
    }
    text.push('\n');
    for i in 0..sc.n {
        write!(
            text,
            "{:e},{}",
            sample.resp.y()[i],
            sample.resp.delta()[i] as u8
        )
        .unwrap();
        for k in 0..sc.p {
            write!(text, ",{:e}", sample.x[[i, k]]).unwrap();
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

#[test]
fn xi_prints_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.txt");
    fs::write(&u, "1\n2\n3\n4\n5\n").unwrap();
    let out = ximsis(&[
        "xi",
        "--u",
        u.to_str().unwrap(),
        "--v",
        u.to_str().unwrap(),
        "--m",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim().parse::<f64>().unwrap(), 8.0 / 11.0);
}

#[test]
fn screen_recovers_example_one_features() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = 20;
    let mut good = 0;
    for seed in 0..seeds {
        let sc = SimScenario::cox_example(200, 2000, 0.3, 100 + seed);
        let data = dir.path().join(format!("ex1_{seed}.csv"));
        write_example_csv(&data, &sc, 0);
        let out_path = dir.path().join(format!("ranked_{seed}.csv"));
        let seed_arg = seed.to_string();
        let out = ximsis(&[
            "screen",
            "--data",
            data.to_str().unwrap(),
            "--time",
            "time",
            "--status",
            "status",
            "--top",
            "38",
            "--seed",
            &seed_arg,
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let text = fs::read_to_string(&out_path).unwrap();
        let selected: Vec<String> = text
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",1"))
            .map(|l| l.split(',').nth(2).unwrap().to_owned())
            .collect();
        assert_eq!(selected.len(), 38);
        let hits = (1..=5)
            .filter(|j| selected.contains(&format!("X{j}")))
            .count();
        good += (hits >= 4) as usize;
        let meta =
            fs::read_to_string(dir.path().join(format!("ranked_{seed}.csv.meta.json"))).unwrap();
        assert!(meta.contains("\"m_used\": 14"));
    }
    assert!(good * 100 >= 95 * seeds as usize, "{good}/{seeds} seeds");
}

#[test]
fn simulate_quick_emits_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example1.toml");
    let out_dir = dir.path().join("report");
    let out = ximsis(&[
        "simulate",
        "--config",
        config,
        "--quick",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,m,d,s_q05,s_q25,s_q50,s_q75,s_q95,iqr,p_X1,p_X2,p_X3,p_X4,p_X5,p_a,realized_cr,seconds_per_rep"
    );
    assert_eq!(lines.count(), 6);
    let rows = ximsis_core::io::read_report_csv(csv.as_bytes()).unwrap();
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.p_a)));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["n_reps"], 100);
    assert_eq!(json["scenario"]["p"], 500);
}

#[test]
fn impute_fills_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "time,status,a,b\n1,1,1,NA\n2,1,1,4\n3,0,5,8\n").unwrap();
    let out_path = dir.path().join("full.csv");
    let out = ximsis(&[
        "impute",
        "--data",
        data.to_str().unwrap(),
        "--k",
        "15",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = ximsis_core::io::load_survival_csv(&out_path, "time", "status").unwrap();
    assert_eq!(table.missing_count(), 0);
    assert_eq!(table.features[[0, 1]], Some(4.0));
}

#[test]
fn errors_are_single_machine_lines() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "time,status,a\n1,2,0.5\n2,1,0.1\n").unwrap();
    let out = ximsis(&[
        "screen",
        "--data",
        data.to_str().unwrap(),
        "--time",
        "time",
        "--status",
        "status",
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.starts_with("error[data]:") && err.contains("status must be 0/1"),
        "{err}"
    );

    let out = ximsis(&["screen", "--data", data.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(stderr(&out).lines().count(), 1);
    assert!(stderr(&out).starts_with("error[usage]:"));

    let out = ximsis(&[
        "xi",
        "--u",
        "/nonexistent",
        "--v",
        "/nonexistent",
        "--m",
        "1",
    ]);
    assert!(stderr(&out).starts_with("error[io]:"));
}
