use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn aml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aml")).args(args).output().expect("spawn aml")
}

fn aml_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    aml(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn last_decade(dir: &Path) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("asymvel.csv")).unwrap();
    let last = text.lines().last().unwrap();
    last.split(',').map(|f| f.parse().unwrap()).collect()
}

const SMALL_STATE: &str = r#"{
  "grid": {"dim": 1, "n": 256, "extent": 16.0, "mass": 1.0},
  "source": {"x0": [0.0], "sigma": 0.5},
  "boxes": [[0.0, 0.5]],
  "t_list": [0.5, 1.0],
  "dt": 0.01,
  "save_state": true
}"#;

#[test]
fn malformed_config_exits_1() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.json", "{\"example\": ");
    let o = aml_in(tmp.path(), &["asymvel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("config error"));
}

#[test]
fn unknown_field_exits_1() {
    let tmp = TempDir::new().unwrap();
    let o = aml_in(tmp.path(), &["asymvel", "--example", "1a", "--set", "speed=3"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("speed"), "{}", stderr(&o));
}

#[test]
fn oscillating_example_exits_2() {
    let tmp = TempDir::new().unwrap();
    let o = aml_in(tmp.path(), &["asymvel", "--example", "1c"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not asymptotically regular"), "{}", stderr(&o));
}

#[test]
fn bounded_wiggle_example_recovers_its_velocity() {
    let tmp = TempDir::new().unwrap();
    let o = aml_in(tmp.path(), &["asymvel", "--example", "1a", "--v", "1,0,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = last_decade(tmp.path());
    assert_eq!(row[0], 1e4);
    for (got, want) in row[1..4].iter().zip([1.0, 0.0, 0.0]) {
        assert!((got - want).abs() < 1e-3, "{row:?}");
    }

    let o = aml_in(tmp.path(), &["asymvel", "--example", "1a", "--v", "-1,2,0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = last_decade(tmp.path());
    for (got, want) in row[1..4].iter().zip([-1.0, 2.0, 0.5]) {
        assert!((got - want).abs() < 1e-3, "{row:?}");
    }
}

#[test]
fn straight_line_file_gives_its_slope() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("t,x,y,z\n");
    for k in 0..=60 {
        let t = 10f64.powf(k as f64 / 10.0);
        text += &format!("{t},{},{},{}\n", 0.25 * t + 1.0, -0.5 * t, 0.125 * t - 2.0);
    }
    let file = write(tmp.path(), "line.csv", &text);
    let o = aml_in(tmp.path(), &["asymvel", "--file", file.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let row = last_decade(tmp.path());
    for (got, want) in row[1..4].iter().zip([0.25, -0.5, 0.125]) {
        assert!((got - want).abs() < 1e-5, "{row:?}");
    }
}

#[test]
fn trajectory_with_bad_header_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let file = write(tmp.path(), "t.csv", "time,x,y,z\n1,1,1,1\n");
    let o = aml_in(tmp.path(), &["asymvel", "--file", file.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn small_grid_exits_3_and_names_the_time() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "q.json",
        r#"{"grid": {"dim": 1, "n": 512, "extent": 4.0, "mass": 1.0},
            "source": {"x0": [0.0], "sigma": 0.1},
            "boxes": [[0.0, 0.5]], "t_list": [1.0, 5.0], "dt": 0.01}"#,
    );
    let o = aml_in(tmp.path(), &["quantum-measure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("t = 1"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = TempDir::new().unwrap();
    let blocker = write(tmp.path(), "file", "");
    let o = aml(&["asymvel", "--example", "1a", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn invalid_thread_count_exits_1() {
    let o = Command::new(env!("CARGO_BIN_EXE_aml"))
        .args(["asymvel", "--example", "1a", "--out", TempDir::new().unwrap().path().to_str().unwrap()])
        .env("AML_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn suite_subset_runs_only_the_selected_group() {
    let tmp = TempDir::new().unwrap();
    let o = aml_in(tmp.path(), &["suite", "--only", "geometry"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).map(String::from).collect();
    assert_eq!(lines.len(), 2, "{lines:?}");
    let summary: Value = serde_json::from_slice(&fs::read(tmp.path().join("suite_summary.json")).unwrap()).unwrap();
    let ids: Vec<u64> = summary["outcomes"].as_array().unwrap().iter().map(|o| o["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2]);
    assert!(tmp.path().join("suite.manifest.json").exists());

    let o = aml_in(tmp.path(), &["suite", "--only", "astrology"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn saved_state_is_accepted_and_corruption_fails_explicitly() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "q.json", SMALL_STATE);
    let o = aml_in(tmp.path(), &["quantum-measure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let state = tmp.path().join("state.bin");

    let o = aml_in(tmp.path(), &["suite", "--only", "geometry", "--state", state.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("n = 256"));

    let mut bytes = fs::read(&state).unwrap();
    bytes.truncate(bytes.len() - 5);
    let truncated = tmp.path().join("truncated.bin");
    fs::write(&truncated, &bytes).unwrap();
    let o = aml_in(tmp.path(), &["suite", "--only", "geometry", "--state", truncated.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("truncated.bin"), "{}", stderr(&o));

    let mut bytes = fs::read(&state).unwrap();
    bytes[48..56].copy_from_slice(&f64::NAN.to_le_bytes());
    let poisoned = tmp.path().join("nan.bin");
    fs::write(&poisoned, &bytes).unwrap();
    let o = aml_in(tmp.path(), &["suite", "--only", "geometry", "--state", poisoned.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "b.json",
        r#"{"initial": "random:42", "horizon": 200,
            "lln": {"p": 0.5, "epsilons": [0.1], "ns": [100], "samples": 500, "seed": 3}}"#,
    );
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let o = aml_in(&dir, &["bernoulli", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["orbit.csv", "frequency.csv", "deviation.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = |d: &Path| -> Value { serde_json::from_slice(&fs::read(d.join("bernoulli.manifest.json")).unwrap()).unwrap() };
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(ma["seed"], 42);
    assert_eq!(ma["outputs"], serde_json::json!(["orbit.csv", "frequency.csv", "deviation.csv"]));
}

#[test]
fn overrides_reach_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "q.json",
        r#"{"measure": {"kind": "uniform", "density": 0.7},
            "action": {"kind": "translations_along_axis", "axis": 1, "offset": 0.0, "window": [0.0, 2.5]},
            "base": [[0.0, 1.0]]}"#,
    );
    let o = aml_in(tmp.path(), &["quotient", "--config", cfg.to_str().unwrap(), "--set", "measure.density=2.0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("quotient.csv")).unwrap();
    let mass: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((mass - 2.0).abs() < 1e-12, "{text}");
}

#[test]
fn boundary_solve_reports_the_gap() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "b.json",
        r#"{"mass": 1.0, "v0": 0.5, "a": 1.0, "velocities": [3.0, 0.5], "t_list": [10.0, 100.0, 1000.0]}"#,
    );
    let o = aml_in(tmp.path(), &["boundary-solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("boundary_limits.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!((rows[0][1].parse::<f64>().unwrap() - 8f64.sqrt()).abs() < 1e-6);
    assert_eq!(rows[0][2], "false");
    assert_eq!(rows[1][2], "true");
}
