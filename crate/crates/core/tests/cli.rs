use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn diffquot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffquot")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn write_xexp(path: &Path) {
    let mut text = String::from("# c_ij = 1/(i+j)!\n");
    let mut fact: u128 = 1;
    for p in 0..=20u128 {
        if p > 0 {
            fact *= p;
        }
        for i in 0..=p {
            text.push_str(&format!("{i} {} 1/{fact}\n", p - i));
        }
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn product_is_rejected_with_a_witness_triple() {
    let out = diffquot(&["check", "--criterion", "algebraic", "--expr", "a*b"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["verdict"], "reject");
    assert_eq!(r["criteria"][0]["witness"]["point"]["kind"], "triple");
}

#[test]
fn syntax_errors_exit_3_with_position() {
    let out = diffquot(&["check", "--expr", "((("]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax error at 3"), "{err}");
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(diffquot(&["check"]).status.code(), Some(3));
    assert_eq!(diffquot(&["check", "--expr", "a", "--bogus"]).status.code(), Some(3));
    assert_eq!(diffquot(&["check", "--expr", "a", "--criterion", "summation"]).status.code(), Some(3));
    assert_eq!(
        diffquot(&["check", "--expr", "a", "--criterion", "integrable", "--mode", "exact"]).status.code(),
        Some(3)
    );
    assert_eq!(diffquot(&["check", "--expr", "a", "--min-gap", "0.7"]).status.code(), Some(3));
    assert_eq!(diffquot(&["demo", "nope"]).status.code(), Some(3));
    assert_eq!(diffquot(&["--help"]).status.code(), Some(0));
    assert_eq!(diffquot(&["--version"]).status.code(), Some(0));
}

#[test]
fn unevaluable_input_is_inconclusive() {
    let out = diffquot(&["check", "--criterion", "algebraic", "--expr", "exp(a)", "--pool", "0,1/2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "inconclusive");
}

#[test]
fn summation_from_file_and_series_export() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("xexp.coeffs");
    let fout = dir.path().join("f.txt");
    write_xexp(&coeffs);
    let out = diffquot(&[
        "recover",
        "--criterion",
        "summation",
        "--series",
        coeffs.to_str().unwrap(),
        "--function-out",
        fout.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["manifest"]["mode"], "exact");
    assert_eq!(r["series"]["profile"]["3"], "1/6");
    assert_eq!(r["series"]["convergence"], "plausible");
    assert_eq!(r["roundtrip"]["verdict"], "accept");
    let text = std::fs::read_to_string(&fout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22);
    assert_eq!(lines[2], "2 1/2");
    assert_eq!(lines[21], "C 0/1");
}

#[test]
fn rejected_recovery_writes_no_function() {
    let dir = tempfile::tempdir().unwrap();
    let fout = dir.path().join("f.txt");
    let out = diffquot(&["recover", "--expr", "a*b", "--function-out", fout.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!fout.exists());
    assert!(report(&out)["recovery"].is_null());
}

#[test]
fn recover_algebraic_with_constant() {
    let out = diffquot(&["recover", "--criterion", "algebraic", "--expr", "a + b", "--constant", "-1/2", "--pool", "0,1/4,1/2,1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let table = r["recovery"]["table"].as_array().unwrap();
    // f(x) = x² − ½
    assert_eq!(table[2]["x"], "1/2");
    assert_eq!(table[2]["value"], "-1/4");
}

#[test]
fn verify_runs_partials_identity() {
    let out = diffquot(&["verify", "--expr", "x^3", "--deriv", "3*x^2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let kinds: Vec<&str> = r["criteria"].as_array().unwrap().iter().map(|c| c["criterion"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["algebraic", "anchored", "matrix", "integrable", "partials_identity"]);
    let out = diffquot(&["verify", "--expr", "sin(x)", "--deriv", "cos(x) + 1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_file_and_replay_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = diffquot(&["check", "--expr", "a^2 + a*b + b^2", "--seed", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let first = std::fs::read(&path).unwrap();
    let again = diffquot(&["replay", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(again.stdout, first);
    assert!(again.stderr.is_empty());
}

#[test]
fn demos_accept() {
    for name in ["dirichlet", "avg-exp", "xexp"] {
        let out = diffquot(&["demo", name]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let r = report(&out);
        assert_eq!(r["verdict"], "accept", "{name}");
        assert!(r.get("wall_time_ms").is_none());
    }
    let r = report(&diffquot(&["demo", "xexp", "--timing"]));
    assert!(r["wall_time_ms"].as_f64().is_some());
}
