//! End-to-end runs of the `collapse-sim` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_collapse-sim"));
    c.env_remove("COLLAPSE_SIM_SEED");
    c
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
}

#[test]
fn stern_gerlach_two_bins_near_half() {
    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("sg.scn"))
        .args(["--trials", "100000", "--seed", "42"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout(&o);
    let up: u64 = field(&r, "up").unwrap().split('\t').next().unwrap().parse().unwrap();
    let down: u64 = field(&r, "down").unwrap().split('\t').next().unwrap().parse().unwrap();
    assert_eq!(up + down, 100_000);
    // binomial oracle: |+x> in the z basis splits evenly
    let sigma = (100_000.0f64 * 0.25).sqrt();
    assert!((up as f64 - 50_000.0).abs() < 3.0 * sigma, "{up}");
    assert!(r.lines().any(|l| l.starts_with("chi_square") && l.ends_with("PASS")));
}

#[test]
fn missing_scenario_exits_two() {
    let o = bin().args(["run", "--scenario", "/no/such/file.scn"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: cannot read"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn malformed_scenario_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.scn");
    std::fs::write(&p, "[scenario]\nname = born\n[particle e]\ntype = electron\nrow = 1 oops | pos 0 0 0\n").unwrap();
    let o = bin().args(["run", "--scenario"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5, column 9"));
}

#[test]
fn unknown_flag_exits_two() {
    let o = bin().args(["run", "--scenario", "x", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_reproduces_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("trial.json");
    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("pipeline.scn"))
        .args(["--trials", "50", "--record"])
        .arg(&rec)
        .args(["--record-trial", "17"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin().args(["run", "--replay"]).arg(&rec).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("replay_identical\ttrue\t-\tPASS"));

    // any change to a stored draw is caught
    let text = std::fs::read_to_string(&rec).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let v = &mut json["records"][0]["draws"][0]["value"];
    *v = serde_json::json!(v.as_f64().unwrap() * 0.5);
    std::fs::write(&rec, json.to_string()).unwrap();
    let o = bin().args(["run", "--replay"]).arg(&rec).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_precedence_flag_env_file() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["run", "--scenario"]).arg(fixture("born.scn")).args(["--trials", "100"]);
        if let Some(e) = env {
            c.env("COLLAPSE_SIM_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        let o = c.output().unwrap();
        field(&stdout(&o), "seed").unwrap().to_string()
    };
    assert_eq!(run(None, None), "3");
    assert_eq!(run(Some("8"), None), "8");
    assert_eq!(run(Some("8"), Some("9")), "9");
    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("born.scn"))
        .env("COLLAPSE_SIM_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.tsv");
    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("epr.scn"))
        .args(["--trials", "2000", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), o.stdout);
    let r = stdout(&o);
    assert_eq!(field(&r, "correlation"), Some("-1\t-\tINFO"));
    assert!(r.starts_with("version\t"));
}

#[test]
fn sweep_exit_codes_follow_verdict() {
    let sweep = |seed: &str| {
        bin()
            .args(["run", "--scenario"])
            .arg(fixture("repeated_field.scn"))
            .args(["--trials", "10000", "--seed", seed, "--sweep", "repetitions=1,2,4,8"])
            .output()
            .unwrap()
    };
    // k = 1 and k = 2 have equal expected peaks, so a one-SE check fails for
    // some seeds; seed 1 is one of them
    assert_eq!(sweep("0").status.code(), Some(0));
    let o = sweep("1");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("nondecreasing\tfalse\t-\tFAIL"));

    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("repeated_field.scn"))
        .args(["--sweep", "mass_ratio=1,2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn energy_sweep_is_reported_not_judged() {
    let o = bin()
        .args(["run", "--scenario"])
        .arg(fixture("bhabha.scn"))
        .args(["--trials", "100", "--sweep", "energy_ratio=1,3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = stdout(&o);
    assert_eq!(r.lines().filter(|l| l.starts_with("energy_ratio\t")).count(), 2);
    assert!(r.lines().any(|l| l.starts_with("nondecreasing\t") && l.ends_with("INFO")));
}

#[test]
fn every_fixture_parses_and_runs() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let p = entry.unwrap().path();
        let o = bin().args(["run", "--scenario"]).arg(&p).args(["--trials", "200"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
    }
}
