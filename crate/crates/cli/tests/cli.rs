//! End-to-end checks of the command-line surface through the real binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn krm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("krm-cli-test-{}-{name}", std::process::id()));
    p
}

const SEED_A: &str = "0101010101010101010101010101010101010101010101010101010101010101";
const SEED_B: &str = "0202020202020202020202020202020202020202020202020202020202020202";

#[test]
fn keygen_encaps_decaps_file_roundtrip() {
    for set in ["krm-bw16", "krm-leech24", "kyber768-baseline"] {
        let pk = tmp(&format!("{set}.pk"));
        let sk = tmp(&format!("{set}.sk"));
        let ct = tmp(&format!("{set}.ct"));
        let ss1 = tmp(&format!("{set}.ss1"));
        let ss2 = tmp(&format!("{set}.ss2"));
        let out = krm(&[
            "keygen", "--set", set, "--seed", SEED_A,
            "--out-pk", pk.to_str().unwrap(), "--out-sk", sk.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "keygen {set}: {}", String::from_utf8_lossy(&out.stderr));
        let out = krm(&[
            "encaps", "--set", set, "--pk", pk.to_str().unwrap(), "--seed", SEED_B,
            "--out-ct", ct.to_str().unwrap(), "--out-ss", ss1.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "encaps {set}: {}", String::from_utf8_lossy(&out.stderr));
        let out = krm(&[
            "decaps", "--set", set, "--sk", sk.to_str().unwrap(), "--ct", ct.to_str().unwrap(),
            "--out-ss", ss2.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "decaps {set}: {}", String::from_utf8_lossy(&out.stderr));
        let a = std::fs::read(&ss1).unwrap();
        let b = std::fs::read(&ss2).unwrap();
        assert_eq!(a, b, "{set}: shared-secret files differ");
        assert!(!a.is_empty());
        for p in [pk, sk, ct, ss1, ss2] {
            let _ = std::fs::remove_file(p);
        }
    }
}

#[test]
fn tables_reproduces_comparison_grid() {
    let out = krm(&["tables"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("krm-leech24"));
    assert!(text.contains("21.6"));
    assert!(text.contains("36.47%"));
    assert!(text.contains("set=krm-bw16"));
    assert!(text.contains("cer_decimal=26.4"));
}

#[test]
fn analyze_reports_certified_bound() {
    let out = krm(&["analyze", "--set", "krm-bw16"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text
        .lines()
        .find(|l| l.starts_with("log2_dfr"))
        .expect("log2_dfr line");
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(
        (-266.0..=-260.0).contains(&value),
        "log2_dfr {value} outside the published window"
    );
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let run = || {
        let out = krm(&[
            "simulate", "--set", "krm-e8", "--trials", "40", "--seed", SEED_A,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    let a = run();
    assert!(a.contains("gaussian part"));
    assert_eq!(a, run());
}

#[test]
fn usage_errors_exit_one() {
    let out = krm(&["analyze", "--set", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown parameter set"));

    let out = krm(&[
        "decaps", "--set", "krm-e8", "--sk", "/nonexistent/sk", "--ct", "/nonexistent/ct",
        "--out-ss", "/tmp/unused-ss",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file not found"));

    // malformed (truncated) ciphertext is distinguished from a missing file
    let pk = tmp("m.pk");
    let sk = tmp("m.sk");
    let ct = tmp("m.ct");
    let ss = tmp("m.ss");
    krm(&[
        "keygen", "--set", "krm-e8", "--seed", SEED_A,
        "--out-pk", pk.to_str().unwrap(), "--out-sk", sk.to_str().unwrap(),
    ]);
    krm(&[
        "encaps", "--set", "krm-e8", "--pk", pk.to_str().unwrap(), "--seed", SEED_B,
        "--out-ct", ct.to_str().unwrap(), "--out-ss", ss.to_str().unwrap(),
    ]);
    let full = std::fs::read(&ct).unwrap();
    std::fs::write(&ct, &full[..full.len() - 1]).unwrap();
    let out = krm(&[
        "decaps", "--set", "krm-e8", "--sk", sk.to_str().unwrap(), "--ct", ct.to_str().unwrap(),
        "--out-ss", ss.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed ciphertext"));
    for p in [pk, sk, ct, ss] {
        let _ = std::fs::remove_file(p);
    }

    let out = krm(&["keygen", "--set", "krm-e8", "--seed", "zz", "--out-pk", "/tmp/x", "--out-sk", "/tmp/y"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = krm(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("selftest passed"));
}

#[test]
fn omitted_seed_is_drawn_and_printed() {
    let pk = tmp("r.pk");
    let sk = tmp("r.sk");
    let out = krm(&[
        "keygen", "--set", "krm-e8", "--out-pk", pk.to_str().unwrap(), "--out-sk",
        sk.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let seed_line = text.lines().find(|l| l.starts_with("seed ")).expect("printed seed");
    assert_eq!(seed_line.trim().len(), "seed ".len() + 64);
    for p in [pk, sk] {
        let _ = std::fs::remove_file(p);
    }
}
