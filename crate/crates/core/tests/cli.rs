mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{crate_dir, scripted_session};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trailer-advisory"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scenario(tag: &str) -> String {
    crate_dir().join("scenarios").join(format!("{tag}.json")).display().to_string()
}

fn inputs(tag: &str) -> String {
    crate_dir().join("scenarios").join(format!("{tag}_inputs.csv")).display().to_string()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_writes_demo_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = run(&["simulate", "--scenario", &scenario("lt2_5"), "--profile", &inputs("lt2_5"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x_R,y_R,psi_1,psi_2,hitch_angle,v_R,delta_f"));
    assert_eq!(lines.count(), 6001);
}

#[test]
fn simulate_is_byte_stable_and_defaults_to_stdout() {
    let args = ["simulate", "--scenario", &scenario("lt1_5"), "--profile", &inputs("lt1_5"), "--duration", "10"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_degrees_flag() {
    let dir = tempfile::tempdir().unwrap();
    let rad = dir.path().join("rad.csv");
    let deg = dir.path().join("deg.csv");
    std::fs::write(&rad, format!("t,v_R,delta_f\n0,-1,{}\n", 10f64.to_radians())).unwrap();
    std::fs::write(&deg, "t,v_R,delta_f\n0,-1,10\n").unwrap();
    let sc = scenario("lt2_5");
    let a = run(&["simulate", "--scenario", &sc, "--profile", rad.to_str().unwrap(), "--duration", "2"]);
    let b = run(&["simulate", "--scenario", &sc, "--profile", deg.to_str().unwrap(), "--duration", "2", "--degrees"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zero_speed_profile_keeps_pose() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("still.csv");
    std::fs::write(&prof, "t,v_R,delta_f\n0,0,0.4\n3,0,-0.4\n").unwrap();
    let o = run(&["simulate", "--scenario", &scenario("lt2_5"), "--profile", prof.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(&f[1..6], &[0.0; 5]);
    }
}

#[test]
fn user_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,v_R,delta_f\n0,-1,abc\n").unwrap();
    let sc = scenario("lt2_5");
    for args in [
        vec!["simulate", "--scenario", "/nonexistent.json", "--profile", &inputs("lt2_5")],
        vec!["simulate", "--scenario", &sc, "--profile", bad.to_str().unwrap()],
        vec!["simulate", "--scenario", &sc],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn jackknife_reported_with_time() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("fold.csv");
    std::fs::write(&prof, "t,v_R,delta_f\n0,-2,0.7\n").unwrap();
    let o = run(&["simulate", "--scenario", &scenario("lt2_5"), "--profile", prof.to_str().unwrap(), "--duration", "30"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("jackknife"), "{err}");
    assert!(err.contains(" t = "), "{err}");
}

#[test]
fn help_and_version_succeed() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}

#[test]
fn track_writes_all_panels() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["track", "--out", dir.path().to_str().unwrap(), "--duration", "10", "--lh", "0.3", "--sweep", "1,0.5,0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["behind_reverse", "behind_forward", "ahead_reverse", "ahead_forward"] {
        let text = read(&dir.path().join(format!("{name}.csv")));
        assert_eq!(text.lines().count(), 1 + 10_001, "{name}");
    }
    let summary = read(&dir.path().join("summary.csv"));
    assert_eq!(summary.lines().count(), 5);

    let sweep = read(&dir.path().join("sweep.csv"));
    let mut forward: Vec<(f64, f64)> = sweep
        .lines()
        .skip(1)
        .filter(|l| l.contains("forward"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    forward.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(forward.windows(2).all(|w| w[0].1 < w[1].1), "{forward:?}");
}

#[test]
fn track_zero_profile_has_no_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("zero.csv");
    std::fs::write(&prof, "t,delta_T\n0,0\n5,0\n").unwrap();
    let o = run(&["track", "--out", dir.path().to_str().unwrap(), "--profile", prof.to_str().unwrap(), "--duration", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&dir.path().join("summary.csv"));
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0, "{line}");
    }
}

#[test]
fn replay_reproduces_session_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("session.ndjson");
    let session = scripted_session("lt2_5");
    session.log().save(&log).unwrap();
    let out = dir.path().join("replayed.csv");
    let o = run(&["replay", "--log", log.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut expected = Vec::new();
    trailer_advisory::trajectory::write_trajectory_csv(&session.log().trajectory(), &mut expected).unwrap();
    assert_eq!(read(&out).into_bytes(), expected);

    let text = read(&log);
    std::fs::write(&log, &text[..text.len() - 30]).unwrap();
    let o = run(&["replay", "--log", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncated"));
}
