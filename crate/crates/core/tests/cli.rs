use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hsnl");

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hsnl-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("HSNL_THREADS").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

/// Runs a command with `threads` workers and returns stdout plus every output file.
fn outputs(dir: &Path, args: &[&str], threads: usize, is_dir: bool) -> Vec<u8> {
    let out = dir.join(format!("t{threads}{}", if is_dir { "" } else { ".csv" }));
    let out_s = out.to_str().unwrap().to_string();
    let t = threads.to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--threads", &t, "--out", &out_s]);
    let mut bytes = ok(&full).stdout;
    if is_dir {
        for f in ["state.csv", "control.csv"] {
            bytes.extend(fs::read(out.join(f)).unwrap());
        }
    } else {
        bytes.extend(fs::read(&out).unwrap());
    }
    bytes
}

#[test]
fn every_command_is_thread_count_independent() {
    let runs: Vec<(&str, Vec<&str>, bool)> = vec![
        ("symbol", vec!["symbol", "--grid", "log:0.01:100:50"], false),
        ("symbol2", vec!["symbol", "--kernel-family", "riesz_truncated", "--kernel-d", "2", "--nu", "0.6,0.8", "--xi", "0.3:0.4,2:-1"], false),
        ("bounds", vec!["bounds"], false),
        ("localize", vec!["localize", "--deltas", "0.2,0.1"], false),
        ("solve", vec!["solve", "--n", "32"], false),
        ("poincare", vec!["poincare", "--n", "64"], false),
        ("poincare_level", vec!["poincare", "--ladder", "level", "--kernel-family", "riesz_truncated", "--levels", "4,16", "--n", "32"], false),
        ("ac", vec!["ac"], false),
        ("ac_nonlocal", vec!["ac", "--mode", "nonlocal", "--kernel-family", "riesz_truncated", "--levels", "4,16", "--hs", "1/16", "--ref_n", "64"], false),
        ("control", vec!["control", "--start", "random", "--seed", "7"], true),
        ("appendix", vec!["appendix"], false),
        ("basis", vec!["basis", "--count", "20", "--seed", "4"], false),
        ("validate", vec!["validate"], false),
    ];
    for (name, args, is_dir) in runs {
        let dir = scratch(name);
        let one = outputs(&dir, &args, 1, is_dir);
        let four = outputs(&dir, &args, 4, is_dir);
        assert!(one == four, "{name} differs between 1 and 4 threads");
        fs::remove_dir_all(&dir).unwrap();
    }
}

#[test]
fn environment_thread_count_matches_flag() {
    let dir = scratch("env");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    ok(&["ac", "--threads", "3", "--out", a.to_str().unwrap()]);
    let o = Command::new(BIN).args(["ac", "--out", b.to_str().unwrap()]).env("HSNL_THREADS", "2").output().unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = run(&["solve", "--nonsense-key", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonsense_key"));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["solve", "--n", "many"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_without_arguments() {
    let o = run(&[]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("symbol") || String::from_utf8_lossy(&o.stderr).contains("symbol"));
}

#[test]
fn validate_succeeds_for_standing_kernels() {
    let o = ok(&["validate", "--kernel-family", "constant_ball"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("standing=pass"));
}

#[test]
fn appendix_table_has_expected_columns() {
    let dir = scratch("appendix");
    let out = dir.join("a.csv");
    ok(&["appendix", "--deltas", "0.1,0.001", "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(&out).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "delta,sin_integral,cos_integral,sin_integral_unit,cos_integral_unit");
    assert_eq!(body.len(), 3);
    let last: Vec<f64> = body[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 2.0 * std::f64::consts::PI).abs() < 0.05);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_header_round_trips_as_config() {
    let dir = scratch("roundtrip");
    let first = dir.join("first.csv");
    let second = dir.join("second.csv");
    ok(&["solve", "--n", "16", "--kernel-scale", "0.2", "--rhs", "func:sine", "--out", first.to_str().unwrap()]);
    ok(&["solve", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    // flags override the file
    let third = dir.join("third.csv");
    ok(&["solve", "--config", first.to_str().unwrap(), "--n=8", "--out", third.to_str().unwrap()]);
    let text = fs::read_to_string(&third).unwrap();
    assert!(text.contains("# n=8\n"));
    assert!(text.contains("# rhs=func:sine\n"));
    assert!(!text.contains("# out="));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn negative_values_are_accepted_as_flag_arguments() {
    let o = ok(&["symbol", "--xi", "-2", "--out", scratch("neg").join("s.csv").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("points=1"));
}

#[test]
fn exhausted_iterations_exit_with_code_two() {
    let dir = scratch("noconv");
    let o = run(&["control", "--max_iter", "1", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    fs::remove_dir_all(&dir).unwrap();
}
