use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rvmon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvmon"))
        .args(args)
        .env_remove("RVMON_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn replay_trace(dir: &Path) -> PathBuf {
    let attack = dir.join("replay.toml");
    fs::write(&attack, "kind = \"position_replay\"\n").unwrap();
    let trace = dir.join("replay.jsonl");
    let out = rvmon(&[
        "inject",
        "--attack",
        &format!("file:{}", s(&attack)),
        "--out",
        s(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    trace
}

fn sim(dir: &Path, attack: &str) -> (PathBuf, Output) {
    let out_dir = dir.join(attack);
    let out = rvmon(&["sim", "--attack", attack, "--out", s(&out_dir)]);
    (out_dir, out)
}

#[test]
fn position_rate_check_flags_two_ticks() {
    let tmp = TempDir::new().unwrap();
    let trace = replay_trace(tmp.path());
    let out_dir = tmp.path().join("check");
    let out = rvmon(&["check", "--spec", "p1", "--trace", s(&trace), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let verdicts = fs::read_to_string(out_dir.join("verdicts.jsonl")).unwrap();
    let violated: Vec<&str> = verdicts
        .lines()
        .filter(|l| l.contains("\"channel\":\"attack\"") && l.contains("true"))
        .collect();
    assert_eq!(violated.len(), 2, "{verdicts}");
    assert!(
        violated[0].contains("\"t\":4.0") && violated[1].contains("\"t\":5.0"),
        "{violated:?}"
    );
    let ok_flags = verdicts
        .lines()
        .filter(|l| l.contains("\"channel\":\"ok_flag\""))
        .count();
    assert_eq!(ok_flags, 5);
    assert!(out_dir.join("report.json").is_file());
}

#[test]
fn spec_file_with_binding_passes() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("quiet.tsl");
    fs::write(&spec, "in x: Events[Int]\ndef attack := x != x\nout x\nout attack\n").unwrap();
    let trace = tmp.path().join("pos.jsonl");
    fs::write(
        &trace,
        "{\"t\":0.0,\"channel\":\"pos\",\"value\":1}\n{\"t\":1.0,\"channel\":\"pos\",\"value\":100}\n",
    )
    .unwrap();
    let out = rvmon(&["check", "--spec", s(&spec), "--trace", s(&trace), "--bind", "x=pos"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("no violations"));
    let unbound = rvmon(&["check", "--spec", s(&spec), "--trace", s(&trace)]);
    assert_eq!(code(&unbound), 1);
    assert!(
        stderr(&unbound).contains("pos") || stderr(&unbound).contains("`x`"),
        "{}",
        stderr(&unbound)
    );
}

#[test]
fn malformed_spec_reports_position() {
    let tmp = TempDir::new().unwrap();
    let trace = replay_trace(tmp.path());
    let spec = tmp.path().join("bad.tsl");
    fs::write(&spec, "in x: Events[Int]\ndef attack := x > \nout attack\n").unwrap();
    let out = rvmon(&["check", "--spec", s(&spec), "--trace", s(&trace)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("syntax error at 3:1"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&rvmon(&["check", "--spec", "p1"])), 1);
    assert_eq!(code(&rvmon(&["bogus"])), 1);
    assert_eq!(code(&rvmon(&["--help"])), 0);
    let tmp = TempDir::new().unwrap();
    let missing = rvmon(&["check", "--spec", "p1", "--trace", s(&tmp.path().join("none.jsonl"))]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn clean_sim_matches_offline_check() {
    let tmp = TempDir::new().unwrap();
    let (dir, out) = sim(tmp.path(), "none");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("no violations") && text.contains("collision: no"),
        "{text}"
    );
    for f in [
        "scenario.toml",
        "clean_trace.jsonl",
        "verdicts.jsonl",
        "report.json",
        "sim_summary.json",
        "plot.csv",
    ] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    assert!(!dir.join("attacked_trace.jsonl").exists());
    let header = fs::read_to_string(dir.join("plot.csv")).unwrap();
    let header = header.lines().next().unwrap();
    for col in [
        "t",
        "headway",
        "rel_vel",
        "ttc",
        "pb2_stop",
        "aeb_status",
        "fcw",
        "p2",
        "p3",
        "p4",
    ] {
        assert!(header.split(',').any(|c| c == col), "{col} not in {header}");
    }

    let check_dir = tmp.path().join("offline");
    let trace = dir.join("clean_trace.jsonl");
    let out = rvmon(&[
        "check",
        "--spec",
        "p2",
        "--spec",
        "p3",
        "--spec",
        "p4",
        "--trace",
        s(&trace),
        "--out",
        s(&check_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["report.json", "verdicts.jsonl"] {
        assert_eq!(
            fs::read(dir.join(f)).unwrap(),
            fs::read(check_dir.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn data_attack_is_attributed_to_data_level() {
    let tmp = TempDir::new().unwrap();
    let (dir, out) = sim(tmp.path(), "data");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.join("attacked_trace.jsonl").is_file());
    let report = rvmon(&["report", s(&dir)]);
    assert_eq!(code(&report), 0);
    let text = stdout(&report);
    assert!(
        text.contains("Data monitor: 2 detections; Functional monitor: 0"),
        "{text}"
    );
    assert!(text.contains("collision: no"), "{text}");
}

#[test]
fn functional_fault_is_attributed_to_functional_level() {
    let tmp = TempDir::new().unwrap();
    let (dir, out) = sim(tmp.path(), "functional");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&rvmon(&["report", s(&dir)]));
    assert!(
        text.contains("Data monitor: 0 detections; Functional monitor: 1"),
        "{text}"
    );
    assert!(text.contains("collision: yes"), "{text}");
}

#[test]
fn shipped_scenarios_run() {
    let tmp = TempDir::new().unwrap();
    for (file, expect) in [
        ("pedestrian.toml", "no violations"),
        ("velocity_spoof.toml", "Data monitor: 2"),
        ("stage_clamp.toml", "collision: yes"),
    ] {
        let out_dir = tmp.path().join(file);
        let out = rvmon(&["sim", "--scenario", s(&scenario(file)), "--out", s(&out_dir)]);
        assert_eq!(code(&out), 0, "{file}: {}", stderr(&out));
        assert!(stdout(&out).contains(expect), "{file}: {}", stdout(&out));
    }
}

#[test]
fn artifacts_are_byte_stable() {
    let tmp = TempDir::new().unwrap();
    let (a, _) = sim(&tmp.path().join("a"), "data");
    let (b, _) = sim(&tmp.path().join("b"), "data");
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn report_needs_a_report() {
    let tmp = TempDir::new().unwrap();
    let out = rvmon(&["report", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    fs::write(tmp.path().join("report.json"), "{not json").unwrap();
    assert_eq!(code(&rvmon(&["report", s(tmp.path())])), 1);
}

#[test]
fn offline_injection_is_caught_by_p2() {
    let tmp = TempDir::new().unwrap();
    let (dir, _) = sim(tmp.path(), "none");
    let spoofed = tmp.path().join("spoofed.jsonl");
    let out = rvmon(&[
        "inject",
        "--trace",
        s(&dir.join("clean_trace.jsonl")),
        "--attack",
        "data",
        "--out",
        s(&spoofed),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = rvmon(&["check", "--spec", "p2", "--trace", s(&spoofed)]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("Data monitor: 2 detections"), "{}", stdout(&out));
    let bad = rvmon(&[
        "inject",
        "--trace",
        s(&spoofed),
        "--attack",
        "functional",
        "--out",
        s(&spoofed),
    ]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn attack_file_overrides_scenario() {
    let tmp = TempDir::new().unwrap();
    let file = format!("file:{}", s(&scenario("velocity_spoof.toml")));
    let out_dir = tmp.path().join("run");
    let out = rvmon(&[
        "sim",
        "--scenario",
        s(&scenario("stage_clamp.toml")),
        "--attack",
        &file,
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("Data monitor: 2 detections; Functional monitor: 0"),
        "{}",
        stdout(&out)
    );
}
