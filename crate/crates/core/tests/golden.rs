//! Byte comparison of report files against checked-in copies.
//!
//! Set `GRIDFLEX_BLESS=1` to rewrite the copies after an intended change.

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check(name: &str, args: &[&str], files: &[&str]) {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gridflex"))
        .args(args)
        .args(["--seed", "0", "--threads", "1", "--output-dir"])
        .arg(tmp.path())
        .env_remove("GRIDFLEX_THREADS")
        .output()
        .unwrap();
    assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    let bless = std::env::var_os("GRIDFLEX_BLESS").is_some();
    for f in files {
        let got = std::fs::read(tmp.path().join(f)).unwrap();
        let want_path = golden_dir().join(format!("{name}_{f}"));
        if bless {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&want_path, &got).unwrap();
            continue;
        }
        let want = std::fs::read(&want_path).unwrap_or_else(|e| panic!("{}: {e}", want_path.display()));
        assert!(
            got == want,
            "{} differs:\n--- got\n{}\n--- want\n{}",
            want_path.display(),
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(&want)
        );
    }
}

#[test]
fn pjm5_smart_lr() {
    check(
        "pjm5_smart",
        &["lr", "bundled:pjm5", "--strategy", "smart", "--capacity", "0.2"],
        &["lr_summary.csv", "envelope.csv"],
    );
}

#[test]
fn pjm5_sweep() {
    check("pjm5", &["sweep", "bundled:pjm5"], &["sweep.csv"]);
}

#[test]
fn ieee24_n1() {
    check(
        "ieee24",
        &["contingency", "bundled:ieee24", "--capacities", "0.2"],
        &["n1.csv"],
    );
}

#[test]
fn pjm5_inductive_allocation() {
    check(
        "pjm5_inductive",
        &["allocate", "bundled:pjm5", "--strategy", "inductive", "--capacity", "0.2", "--tau-points", "6"],
        &["alloc.csv", "activation_order.txt"],
    );
}
