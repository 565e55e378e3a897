//! End-to-end checks of the `simulate` binary.

use std::fs;
use std::process::Command;

fn simulate(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("spawn simulate");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn writes_self_describing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let (code, err) = simulate(&["--scenario", "fig1", "--set", "m_values=1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "# omega_c=1"));
    assert!(text.lines().any(|l| l == "# m_values=1,2"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "m,gt,re_alpha,im_alpha");
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# lossless ensemble sweep\nbackend = analytic\nsweep_param = N\nsweep_min = 2\nsweep_max = 3\nsweep_points = 2\nsweep_scale = linear\ngt_max = 1000\n").unwrap();
    let out = dir.path().join("sweep.csv");
    let (code, err) = simulate(&[
        "--scenario", "sweep",
        "--config", cfg.to_str().unwrap(),
        "--set", "Q=inf",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# Q=inf\n"));
    assert!(text.contains("# backend=analytic\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let (code, err) = simulate(&["--scenario", "fig2a", "--set", "gt_max=50", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "N = 10\n\nbogus = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--scenario", "fig9", "--out", out],
        vec!["--scenario", "fig2a", "--set", "n_th=-1", "--out", out],
        vec!["--scenario", "fig2a", "--set", "Q", "--out", out],
        vec!["--scenario", "fig2a", "--config", bad.to_str().unwrap(), "--out", out],
        vec!["--scenario", "fig2a", "--config", "/nonexistent/run.cfg", "--out", out],
        vec!["--scenario", "fig2a"],
    ];
    for args in cases {
        let (code, err) = simulate(&args);
        assert_eq!(code, 1, "{args:?}: {err}");
    }
    let (_, err) = simulate(&["--scenario", "fig2a", "--config", bad.to_str().unwrap(), "--out", out]);
    assert!(err.contains("line 3") && err.contains("bogus"), "{err}");
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // window too short to contain the optimum
    let (code, err) = simulate(&[
        "--scenario", "fig2c",
        "--set", "gt_max=5",
        "--set", "q_points=2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("no interior minimum"), "{err}");
}
