use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rflaf::config::ExperimentConfig;
use rflaf::table::Table;

fn rflaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rflaf")).args(args).output().expect("spawn rflaf")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bounds_run_writes_tables_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let res = rflaf(&["bounds", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let quad = Table::parse(&fs::read_to_string(out.join("quadrature.txt")).unwrap()).unwrap();
    assert_eq!(quad.len(), 9);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(!report.contains("FAIL"));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "mode = \"taylor-verify\"\n[taylor]\nwidths = [1.0]\nn_terms = 2\n");
    let res = rflaf(&["taylor-verify", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL"));
}

#[test]
fn unknown_key_is_named_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "mode = \"bounds\"\n[bounds]\nwidht = 0.1\n");
    let res = rflaf(&["bounds", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("widht"));
}

#[test]
fn invalid_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "mode = \"rate-study\"\n[rate]\ntrials = 0\n");
    let res = rflaf(&["rate-study", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("rate.trials"));
}

#[test]
fn mode_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.toml", "mode = \"bounds\"\n");
    let res = rflaf(&["rate-study", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("mode"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write(dir.path(), "s.toml", "mode = \"bounds\"\nseed = 3\n");
    let res = rflaf(&["bounds", "--config", &cfg, "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let written = ExperimentConfig::load(&out.join("config.toml")).unwrap();
    assert_eq!(written.seed, 42);
}

#[test]
fn missing_config_file_exits_two() {
    let res = rflaf(&["bounds", "--config", "/nonexistent/rflaf.toml"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("/nonexistent/rflaf.toml"));
}
