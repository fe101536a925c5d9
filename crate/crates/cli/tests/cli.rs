use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mptherm"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn out_dir(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn simulate_zero_scenario_writes_zero_history() {
    let out = out_dir("simulate_zero");
    let o = run(&["simulate", "--scenario", s(&scenario("zero.toml")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("history.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,x,u1,u2,u3,v1"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 20);
        assert!(cols[2..].iter().all(|&c| c == 0.0));
        rows += 1;
    }
    assert_eq!(rows, 11 * 33);
    assert!(out.join("boundary.csv").exists());
    assert_eq!(summary(&out)["schema"], 1);
}

#[test]
fn energy_check_passes_on_shipped_scenario() {
    let out = out_dir("energy");
    let o = run(&["check-energy", "--scenario", s(&scenario("energy.toml")), "--out", s(&out)]);
    assert!(o.status.success());
    let j = summary(&out);
    assert_eq!(j["command"], "check-energy");
    assert_eq!(j["pass"], true);
    let c = &j["checks"][0];
    assert!(c["defect"].as_f64().unwrap() < 1e-5);
    assert!(std::fs::read_to_string(out.join("energy.csv")).unwrap().starts_with("t,kinetic,free,mechanical_total,drift"));
}

#[test]
fn reciprocity_check_passes_on_shipped_pair() {
    let out = out_dir("reciprocity");
    let o = run(&[
        "check-reciprocity",
        "--scenario",
        s(&scenario("reciprocity_a.toml")),
        "--scenario-b",
        s(&scenario("reciprocity_b.toml")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(summary(&out)["pass"], true);
    let text = std::fs::read_to_string(out.join("reciprocity.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn failing_tolerance_exits_one() {
    let out = out_dir("strict");
    let o = run(&["check-energy", "--scenario", s(&scenario("energy.toml")), "--out", s(&out), "--tol-energy", "1e-20"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&out)["pass"], false);
}

#[test]
fn levels_write_one_file_each() {
    let out = out_dir("levels");
    let o = run(&["simulate", "--scenario", s(&scenario("zero.toml")), "--out", s(&out), "--levels", "2"]);
    assert!(o.status.success());
    assert!(out.join("history.csv").exists() && out.join("history_L2.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (out_dir("rerun_a"), out_dir("rerun_b"));
    for d in [&a, &b] {
        let o = run(&["simulate", "--scenario", s(&scenario("variational.toml")), "--out", s(d)]);
        assert!(o.status.success());
    }
    for f in ["history.csv", "boundary.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn print_defaults_and_scenario() {
    let o = run(&["--print-defaults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["n_nodes", "preset", "t_end", "record_every"] {
        assert!(text.contains(key), "{key}");
    }

    let o = run(&["--print-scenario", "--scenario", s(&scenario("reciprocity_a.toml"))]);
    assert!(o.status.success());
    let printed = out_dir("printed");
    std::fs::create_dir_all(&printed).unwrap();
    let file = printed.join("printed.toml");
    std::fs::write(&file, &o.stdout).unwrap();
    let again = run(&["--print-scenario", "--scenario", s(&file)]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn errors_are_reported_as_json() {
    let out = out_dir("errors");
    let o = run(&["simulate", "--scenario", "/nonexistent/x.toml", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "IO_ERROR");

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "VALIDATION_ERROR");

    let o = run(&["check-reciprocity", "--scenario", s(&scenario("reciprocity_a.toml")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_json(&o)["message"].as_str().unwrap().contains("scenario-b"));

    let o = run(&["check-energy", "--scenario", s(&scenario("zero.toml")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "DEGENERATE");
}

#[test]
fn missing_right_end_names_the_key() {
    let dir = out_dir("bad_scenario");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.toml");
    let text = std::fs::read_to_string(scenario("zero.toml")).unwrap().replace("[boundary.right]\n", "");
    std::fs::write(&file, text).unwrap();
    let o = run(&["simulate", "--scenario", s(&file), "--out", s(&dir)]);
    assert_eq!(o.status.code(), Some(2));
    let j = error_json(&o);
    assert_eq!(j["error"], "VALIDATION_ERROR");
    assert!(j["message"].as_str().unwrap().contains("boundary.right"), "{j}");
}
