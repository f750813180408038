//! End-to-end smoke tests of the `fq` binary: exit codes, file output,
//! and error surfaces.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("fq-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn codebook_build_and_show_round_trip() {
    let out = tmp("cb.json");
    let _ = std::fs::remove_file(&out);
    let r = fq(&["codebook", "build", "--N", "2", "--d", "1", "--T", "1", "--out"])
        .status
        .code();
    // missing value for --out is a usage error
    assert_eq!(r, Some(2));
    assert!(!out.exists());

    let r = fq(&[
        "codebook",
        "build",
        "--N",
        "2",
        "--d",
        "1",
        "--T",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("allocation: [2]"), "{stdout}");
    assert!(stdout.contains("distortion: 0.24198772"), "{stdout}");

    let r = fq(&["codebook", "show", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("size 2"));
    let _ = std::fs::remove_file(&out);
}

#[test]
fn codebook_show_missing_file_is_io_error() {
    let r = fq(&["codebook", "show", "/nonexistent/fq-codebook.json"]);
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn rate_quadratic_csv_output() {
    let out = tmp("rate.csv");
    let _ = std::fs::remove_file(&out);
    let r = fq(&[
        "rate",
        "quadratic",
        "--N",
        "10,100,1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# invocation:"));
    assert!(lines[1].starts_with("# fquant version"));
    assert_eq!(lines[2], "N,quadratic_error,rate_constant");
    assert_eq!(lines.len(), 6);
    assert!(lines[3].starts_with("10,"));
    let _ = std::fs::remove_file(&out);
}

#[test]
fn rate_holder_requires_seed() {
    let r = fq(&["rate", "holder", "--N", "4", "--paths", "4", "--grid", "128"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn rate_holder_reproducible() {
    let args = [
        "rate", "holder", "--N", "4,16", "--q", "2.5", "--grid", "256", "--paths", "8", "--seed",
        "42",
    ];
    let a = fq(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = fq(&args);
    // identical tables modulo nothing: the invocation comment is identical too
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sde_converge_unknown_spec_lists_registry() {
    let r = fq(&[
        "sde", "converge", "--N", "4", "--spec", "nope", "--seed", "1", "--paths", "4", "--grid",
        "256",
    ]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("gbm") && err.contains("zero-diffusion"), "{err}");
}

#[test]
fn sde_converge_zero_diffusion_small() {
    let r = fq(&[
        "sde",
        "converge",
        "--N",
        "2,4",
        "--spec",
        "zero-diffusion",
        "--seed",
        "3",
        "--paths",
        "4",
        "--grid",
        "256",
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8_lossy(&r.stdout);
    let medians: Vec<f64> = text
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('N'))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(medians.len(), 2);
    for m in medians {
        assert!(m < 1e-4, "median {m}");
    }
}

#[test]
fn cubature_json_estimate() {
    let r = fq(&[
        "cubature",
        "--N",
        "100",
        "--spec",
        "gbm",
        "--functional",
        "terminal",
        "--grid",
        "512",
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let est = doc["estimate"].as_f64().unwrap();
    let exact = (0.5f64 * 0.09).exp();
    assert!((est - exact).abs() / exact < 0.1, "estimate {est}");
    assert_eq!(doc["N"].as_u64(), Some(100));
    assert_eq!(doc["functional"].as_str(), Some("terminal"));
}

#[test]
fn cubature_unknown_functional() {
    let r = fq(&["cubature", "--N", "10", "--functional", "nope"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("terminal"));
}

#[test]
fn malformed_flag_no_file() {
    let out = tmp("never.csv");
    let _ = std::fs::remove_file(&out);
    let r = fq(&[
        "rate",
        "quadratic",
        "--N",
        "ten",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
}
