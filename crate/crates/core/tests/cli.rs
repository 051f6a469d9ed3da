use std::path::Path;
use std::process::{Command, Output};

use crossconv::tt::io::{tt_read, tt_write};
use crossconv::TTTensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn crossconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossconv")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_default_sweep_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let first = crossconv(&["verify", "--out", path(&a)]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(crossconv(&["verify", "--out", path(&b)]).status.code(), Some(0));
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    // d in {1,2,3} x n in {8,16} x eps in {1e-4,1e-8} x {real, complex}
    assert_eq!(text.lines().count(), 1 + 24);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn injected_fault_fails_the_suite() {
    let out = crossconv(&["verify", "--d", "1,2", "--n", "8", "--inject-fault", "skip-real-part"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).any(|l| l.ends_with(",false")));
}

#[test]
fn json_mirrors_csv() {
    let csv = crossconv(&["verify", "--d", "2", "--n", "8", "--eps", "1e-6"]);
    let json = crossconv(&["verify", "--d", "2", "--n", "8", "--eps", "1e-6", "--format", "json"]);
    let records: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let csv = String::from_utf8(csv.stdout).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let rows = records.as_array().unwrap();
    assert_eq!(rows.len(), csv.lines().count() - 1);
    for key in header {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(crossconv(&["verify", "--n", "1"]).status.code(), Some(1));
    assert_eq!(crossconv(&["verify", "--eps", "2"]).status.code(), Some(1));
    assert_eq!(crossconv(&["verify", "--d", "7"]).status.code(), Some(1));
    assert_eq!(crossconv(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(crossconv(&["verify", "--d", "3", "--n", "1024"]).status.code(), Some(1));
    assert_eq!(crossconv(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_with_three_and_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.tt");
    assert_eq!(crossconv(&["newton", "--n", "16", "--density-tt", path(&missing)]).status.code(), Some(3));
    let garbage = dir.path().join("garbage.tt");
    std::fs::write(&garbage, b"TTv2 not a tensor").unwrap();
    assert_eq!(crossconv(&["hf", "--init-tt", path(&garbage)]).status.code(), Some(3));

    let out = dir.path().join("no/such/dir/report.csv");
    assert_eq!(crossconv(&["verify", "--d", "1", "--n", "8", "--out", path(&out)]).status.code(), Some(3));
    assert!(!out.exists());
    // Only the garbage file remains: no temporary leftovers.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "d = 2\nn = [8]\neps = 1e-5\nformat = \"json\"\n").unwrap();
    let out = crossconv(&["verify", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let records: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 2);
    assert_eq!(records[0]["d"], 2);
    // flags win over the file
    let out = crossconv(&["verify", "--config", path(&cfg), "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("case,"));
    std::fs::write(&cfg, "wibble = 3\n").unwrap();
    assert_eq!(crossconv(&["verify", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn newton_reports_error_against_closed_form() {
    let out = crossconv(&["newton", "--density", "gaussian", "--L", "8", "--n", "32", "--eps", "1e-7", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let err = rec[0]["max_error"].as_f64().unwrap();
    assert!(err > 0.0 && err < 0.5, "{err}");
    let yukawa = crossconv(&["newton", "--kernel", "yukawa", "--kappa", "1.5", "--n", "32", "--format", "json"]);
    let rec: serde_json::Value = serde_json::from_slice(&yukawa.stdout).unwrap();
    assert!(rec[0]["max_error"].is_null());
}

#[test]
fn potential_written_by_newton_is_read_by_hf() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("potential.tt");
    let out = crossconv(&["newton", "--n", "24", "--L", "8", "--save-tt", path(&saved)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = tt_read(&saved).unwrap();
    assert_eq!(t.mode_sizes(), vec![24; 3]);

    // The potential has the shape of an orbital on the same grid; hf accepts
    // it as a starting guess.
    let log = dir.path().join("log.csv");
    let out = crossconv(&[
        "hf", "--system", "hydrogen", "--no-hartree", "--n", "24", "--L", "8", "--max-iter", "3",
        "--init-tt", path(&saved), "--log", path(&log),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = String::from_utf8(out.stdout).unwrap();
    assert!(rows.starts_with("system,n,L,eps,hartree,energy,reference,abs_error,rel_error"));
    let log = std::fs::read_to_string(&log).unwrap();
    assert_eq!(log.lines().count(), 1 + 3);
}

#[test]
fn hf_rejects_orbital_on_another_grid() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("psi.tt");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    tt_write(&TTTensor::random(&[8, 8, 8], &[2, 2], false, &mut rng).unwrap(), &p).unwrap();
    let out = crossconv(&["hf", "--n", "16", "--init-tt", path(&p)]);
    assert_eq!(out.status.code(), Some(1));
}
