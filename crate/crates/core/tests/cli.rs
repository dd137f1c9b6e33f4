use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gridflex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridflex"))
        .args(args)
        .env_remove("GRIDFLEX_THREADS")
        .output()
        .expect("spawn gridflex")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pjm5() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../cases/pjm5.gfcase")
        .to_string_lossy()
        .into_owned()
}

fn out_dir(tmp: &TempDir) -> String {
    tmp.path().to_string_lossy().into_owned()
}

fn rows(path: PathBuf) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_case_names_the_path() {
    let o = gridflex(&["lr", "/nonexistent/grid.gfcase"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/grid.gfcase"), "{}", stderr(&o));
}

#[test]
fn envelope_has_one_row_per_alpha_point() {
    let tmp = TempDir::new().unwrap();
    let o = gridflex(&["lr", &pjm5(), "--alpha-points", "41", "--output-dir", &out_dir(&tmp)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let env = rows(tmp.path().join("envelope.csv"));
    assert_eq!(env.len(), 4 * 41);
    for bus in ["1", "2", "3", "4"] {
        assert_eq!(env.iter().filter(|r| r[0] == bus).count(), 41);
    }
    let summary = rows(tmp.path().join("lr_summary.csv"));
    assert_eq!(summary.len(), 8);
    let raw = std::fs::read(tmp.path().join("lr_summary.csv")).unwrap();
    assert!(raw.windows(2).any(|w| w == b"\r\n"));
}

#[test]
fn infeasible_levels_exit_2() {
    let tmp = TempDir::new().unwrap();
    let o = gridflex(&["lr", &fixture("short.gfcase"), "--output-dir", &out_dir(&tmp)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no feasible dispatch"));
    assert!(tmp.path().join("lr_summary.csv").exists());
}

#[test]
fn verify_flags_an_interior_optimum_missed_by_the_grid() {
    let o = gridflex(&["verify", &fixture("interior.gfcase"), "--strategy", "smart", "--capacity", "0.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("350"));
}

#[test]
fn verify_base_strategy_has_no_gap() {
    let o = gridflex(&["verify", &pjm5(), "--strategy", "base"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("gap       0 MW"), "{}", stdout(&o));
}

#[test]
fn unknown_keys_need_lenient() {
    let tmp = TempDir::new().unwrap();
    let text = std::fs::read_to_string(pjm5()).unwrap();
    let case = tmp.path().join("extra.gfcase");
    std::fs::write(&case, text.replacen("base_mva = 100.0", "base_mva = 100.0\nfrequency = 60", 1)).unwrap();
    let case = case.to_string_lossy().into_owned();

    let o = gridflex(&["lr", &case, "--output-dir", &out_dir(&tmp)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("frequency"), "{}", stderr(&o));

    let o = gridflex(&["lr", &case, "--lenient", "--output-dir", &out_dir(&tmp)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
}

#[test]
fn zero_threads_is_rejected() {
    let o = gridflex(&["lr", &pjm5(), "--threads", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_gridflex"))
        .args(["lr", &pjm5()])
        .env("GRIDFLEX_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_strategy_is_a_usage_error() {
    let o = gridflex(&["lr", &pjm5(), "--strategy", "resistive"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn contingency_only_one_outage() {
    let tmp = TempDir::new().unwrap();
    let o = gridflex(&[
        "contingency",
        "bundled:ieee24",
        "--only",
        "15-24",
        "--strategies",
        "base,smart",
        "--output-dir",
        &out_dir(&tmp),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let n1 = rows(tmp.path().join("n1.csv"));
    let outages: Vec<&str> = n1.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(outages, ["intact", "intact", "15-24", "15-24"]);
}

#[test]
fn contingency_unknown_line() {
    let o = gridflex(&["contingency", &pjm5(), "--only", "1-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1-3"));
}

#[test]
fn allocate_writes_both_reports() {
    let tmp = TempDir::new().unwrap();
    let o = gridflex(&[
        "allocate",
        &pjm5(),
        "--strategy",
        "inductive",
        "--capacity",
        "0.2",
        "--tau-points",
        "4",
        "--output-dir",
        &out_dir(&tmp),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let alloc = rows(tmp.path().join("alloc.csv"));
    // 4 budgets x 6 candidate lines
    assert_eq!(alloc.len(), 24);
    for r in alloc.iter().filter(|r| r[0] == "0") {
        assert_eq!(r[2], "0");
    }
    let order = std::fs::read_to_string(tmp.path().join("activation_order.txt")).unwrap();
    assert!(order.starts_with("# inductive"));
    assert!(order.contains("1. "));
}

#[test]
fn unsorted_taus_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = gridflex(&["allocate", &pjm5(), "--taus", "0.4,0.2", "--output-dir", &out_dir(&tmp)]);
    assert_eq!(o.status.code(), Some(1));
}
