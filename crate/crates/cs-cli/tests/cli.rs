//! End-to-end tests against the built `cslab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const A0: &str = "0,1,0;0,1,1;1,0,1";
const SIG0_A: &str = "0,-1,-2;0,-1,-3;1,2,5";
const AMB: &str = "0,-5,-8;0,2,3;1,0,-7";

#[test]
fn check_exit_codes_and_output() {
    let out = cslab(&["check", A0]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("trace: 2"));

    let out = cslab(&["check", SIG0_A, "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["cs"], true);
    assert_eq!(v["trace"], 4);

    // identity is unimodular but det(M - I) = 0
    assert_eq!(code(&cslab(&["check", "1,0,0;0,1,0;0,0,1"])), 1);
    // malformed input
    assert_eq!(code(&cslab(&["check", "1,2;3,4"])), 2);
    // unknown flag is a hard error
    assert_eq!(code(&cslab(&["check", A0, "--bogus"])), 2);
}

#[test]
fn check_reads_matrix_from_file() {
    let dir = std::env::temp_dir().join("cslab-test-at-file");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.txt");
    std::fs::write(&path, format!("{SIG0_A}\n")).unwrap();
    let arg = format!("@{}", path.display());
    let out = cslab(&["check", &arg]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("trace: 4"));
}

#[test]
fn standardize_known_forms() {
    let out = cslab(&["standardize", A0, "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["form"]["a"], 1);
    assert_eq!(v["form"]["f"], 1);
    assert_eq!(
        v["conjugator"],
        serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    );

    // already standard: returned unchanged with P = I
    let out = cslab(&["standardize", AMB, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["form"]["a"], -5);
    assert_eq!(v["form"]["d"], 3);
    assert_eq!(
        v["conjugator"],
        serde_json::json!([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    );

    assert_eq!(code(&cslab(&["standardize", "1,0,0;0,1,0;0,0,1"])), 1);
}

#[test]
fn certify_verify_round_trip() {
    let dir = std::env::temp_dir().join("cslab-test-certify");
    std::fs::create_dir_all(&dir).unwrap();
    let cert = dir.join("cert.json");
    let cert_arg = cert.to_str().unwrap();

    let out = cslab(&["certify", AMB, "--out", cert_arg]);
    assert_eq!(code(&out), 0);
    let out = cslab(&["verify", cert_arg]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("ok"));

    // tamper with one digit of a step matrix
    let text = std::fs::read_to_string(&cert).unwrap();
    let tampered = text.replacen("\"k\": 2", "\"k\": 3", 1);
    let bad = dir.join("bad.json");
    std::fs::write(&bad, if tampered != text { tampered } else { text.replacen('3', "4", 1) })
        .unwrap();
    let out = cslab(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    // not JSON at all
    let garbage = dir.join("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    assert_eq!(code(&cslab(&["verify", garbage.to_str().unwrap()])), 2);
}

#[test]
fn verify_shipped_chain_fixture() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sig0_chain.json");
    let out = cslab(&["verify", fixture.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("4 steps"));
}

#[test]
fn certify_survivor_is_unknown() {
    // standard form (a,c,d,e,f) = (-65,24,-17,0,3): passes all four
    // survivor inequalities, and its trace 27 is congruent to 10 mod
    // 17, the one residue class the trace-adjustment theorem misses,
    // so certification must give up rather than guess
    let survivor = "0,-65,46;0,24,-17;1,0,3";
    let out = cslab(&["certify", survivor]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("unknown"));

    // sanity: the same form is emitted by --survivors-only
    let out = cslab(&[
        "enumerate", "--c", "24:24", "--e", "0:0", "--f", "3:3", "--d-bound", "17",
        "--survivors-only",
    ]);
    assert!(stdout(&out).contains("\"a\":-65"));
}

#[test]
fn enumerate_is_deterministic_and_jobs_invariant() {
    let base = cslab(&["enumerate", "--c", "2", "--e", "2", "--f", "2", "--d-bound", "20"]);
    assert_eq!(code(&base), 0);
    let one = cslab(&[
        "enumerate", "--c", "2", "--e", "2", "--f", "2", "--d-bound", "20", "--jobs", "1",
    ]);
    let four = cslab(&[
        "enumerate", "--c", "2", "--e", "2", "--f", "2", "--d-bound", "20", "--jobs", "4",
    ]);
    assert_eq!(stdout(&base), stdout(&one));
    assert_eq!(stdout(&base), stdout(&four));
    assert!(!stdout(&base).is_empty());

    // every line parses back into a valid form
    for line in stdout(&base).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["d"].as_i64().unwrap() != 0);
    }

    // small bounds admit no survivors (|d| >= 17 is unreachable)
    let out = cslab(&[
        "enumerate", "--c", "2", "--e", "2", "--f", "2", "--d-bound", "10", "--survivors-only",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());

    // empty range: empty output, still success
    let out = cslab(&["enumerate", "--c", "1:0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).is_empty());
}

#[test]
fn verify_paper_suite() {
    let out = cslab(&["verify-paper"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).matches("pass").count(), 6);

    let out = cslab(&["verify-paper", "--only", "sig0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1);

    let out = cslab(&["verify-paper", "--only", "nonsense"]);
    assert_eq!(code(&out), 2);

    // test mode: a deliberately broken fixture must produce a named failure
    let out = cslab(&["verify-paper", "--demo-break"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}
