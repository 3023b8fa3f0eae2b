//! The `phasefield` binary.

use std::process::Command;

fn phasefield(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phasefield"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn single_level_run_prints_a_one_row_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("one.conf");
    std::fs::write(
        &config,
        "name = one\nexample = circle\nq = 2\ngamma = 16/3\nlevels = 1\nh0 = 0.0375\ncsv = one.csv\n",
    )
    .unwrap();
    let out = phasefield(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let written = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert_eq!(stdout, written);
    let rows = phasefield_cli::table::parse_csv(&written).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].eocs.is_none());
    assert!((rows[0].h - 0.0375).abs() < 1e-15);
    assert!((rows[0].epsilon - 0.2).abs() < 1e-12);
}

#[test]
fn unknown_key_fails_and_names_the_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(
        &config,
        "example = circle\nq = 2\nh0 = 0.0375\nrefinements = 3\n",
    )
    .unwrap();
    let out = phasefield(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("refinements"), "{stderr}");
    assert!(stderr.contains("element_order"), "{stderr}");
}

#[test]
fn missing_config_fails() {
    let out = phasefield(&["run", "--config", "no-such-config"]);
    assert!(!out.status.success());
}

#[test]
fn selftest_reports_only_passes() {
    let out = phasefield(&["selftest"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().count() >= 6);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn list_examples_names_every_bundled_config() {
    let out = phasefield(&["list-examples"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in [
        "example1_q2",
        "example1_q6",
        "example2_q1",
        "example2_q6",
        "example1_p2",
        "example3",
    ] {
        assert!(stdout.contains(name), "{name} missing from {stdout}");
    }
}
