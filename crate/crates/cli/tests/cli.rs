use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dcnot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcnot")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CNOT: &str = "QCKT 1\nNBITS 2\nDCNOT 0 1 0 0 1 1 0 0\n";
// SWAP = three CNOTs with alternating control.
const SWAP: &str = "QCKT 1\nNBITS 2\nDCNOT 0 1 0 0 1 1 0 0\nDCNOT 0 1 1 0 0 0 0 1\nDCNOT 0 1 0 0 1 1 0 0\n";

#[test]
fn random_is_seeded_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.qc");
    let b = dir.path().join("b.qc");
    assert_eq!(code(&dcnot(&["random", "--nbits", "3", "--dcnots", "7", "--seed", "11", "-o", s(&a)])), 0);
    assert_eq!(code(&dcnot(&["random", "--nbits", "3", "--dcnots", "7", "--seed", "11", "-o", s(&b)])), 0);
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    let c = dcnot_core::circuit::parse(&ta).unwrap();
    assert_eq!(dcnot_core::circuit::serialize(&c), ta);
    let out = dcnot(&["random", "--nbits", "3", "--dcnots", "7", "--seed", "12"]);
    assert_ne!(String::from_utf8(out.stdout).unwrap(), ta);
}

#[test]
fn random_four_qubits_is_usage_error() {
    let out = dcnot(&["random", "--nbits", "4", "--dcnots", "3", "--seed", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simplify_verifies_and_reduces() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.qc");
    let b = dir.path().join("b.qc");
    dcnot(&["random", "--nbits", "2", "--dcnots", "8", "--seed", "5", "-o", s(&a)]);
    let out = dcnot(&["simplify", s(&a), "-o", s(&b), "--verify", "--report", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["initial_dcnot_count"], 8);
    assert!(rep["final_dcnot_count"].as_u64().unwrap() <= 3);
    assert_eq!(rep["verified"], true);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b)])), 0);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b), "--mode", "exact"])), 0);
}

#[test]
fn simplify_to_stdout_keeps_report_off_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "swap.qc", SWAP);
    let out = dcnot(&["simplify", s(&a), "--report", "text"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(dcnot_core::circuit::parse(&text).is_ok());
    assert!(String::from_utf8(out.stderr).unwrap().contains("final_dcnot_count"));
}

#[test]
fn cnot_is_not_swap() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "cnot.qc", CNOT);
    let b = write(dir.path(), "swap.qc", SWAP);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b)])), 1);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b), "--mode", "exact"])), 1);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&a)])), 0);
}

#[test]
fn local_dressing_is_lo_rhs_but_not_exact() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "cnot.qc", CNOT);
    let b = write(dir.path(), "cnot_rot.qc", &format!("{CNOT}ROT 1 1 0 0 0.3\n"));
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b)])), 0);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b), "--mode", "exact"])), 1);
}

#[test]
fn malformed_input_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.qc", "QCKT 1\nNBITS 2\nDCNOT 0 1 0 0 2 1 0 0\n");
    let out = dcnot(&["simplify", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));
    let wire = write(dir.path(), "wire.qc", "QCKT 1\nNBITS 2\nROT 2 0 0 1 0.1\n");
    assert_eq!(code(&dcnot(&["simplify", s(&wire)])), 2);
    let two = write(dir.path(), "cnot.qc", CNOT);
    let three = write(dir.path(), "three.qc", "QCKT 1\nNBITS 3\n");
    assert_eq!(code(&dcnot(&["verify", s(&two), s(&three)])), 2);
    assert_eq!(code(&dcnot(&["simplify", s(&two), "--disable", "nope"])), 2);
}

#[test]
fn invariant_of_single_cnot() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "cnot.qc", CNOT);
    let out = dcnot(&["invariant", s(&a)]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("A2 ="));
    assert!(text.contains("lambda_r"));
    // One DC-NOT cannot be diagonalized as a 2- or 3-run.
    assert_eq!(code(&dcnot(&["invariant", s(&a), "--diagonalize"])), 3);
    let three = write(dir.path(), "three.qc", "QCKT 1\nNBITS 3\n");
    assert_eq!(code(&dcnot(&["invariant", s(&three)])), 2);
}

#[test]
fn invariant_values() {
    let dir = tempfile::tempdir().unwrap();
    // ẑ on wire 0, x̂ on wire 1: A2 = −σx⊗σz, so λr = λi = 0 and Γ(Λr) has a
    // single −1 at row x, column z.
    let a = write(dir.path(), "cnot.qc", CNOT);
    let text = String::from_utf8(dcnot(&["invariant", s(&a)]).stdout).unwrap();
    assert!(text.contains("lambda_r = +0.000000000") || text.contains("lambda_r = -0.000000000"), "{text}");
    let gr: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("Gamma(Lambda_r)")).skip(1).take(3).collect();
    assert_eq!(gr[0].trim().replace("-0.000000", "+0.000000"), "[+0.000000, +0.000000, -1.000000]", "{text}");
    let id = write(dir.path(), "id.qc", "QCKT 1\nNBITS 2\n");
    let text = String::from_utf8(dcnot(&["invariant", s(&id)]).stdout).unwrap();
    assert!(text.contains("lambda_r = +1.000000000"), "{text}");
    assert!(text.contains("lambda_i = +0.000000000") || text.contains("lambda_i = -0.000000000"), "{text}");
}

#[test]
fn empty_circuit_is_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "e.qc", "QCKT 1\nNBITS 2\n");
    let out = dcnot(&["simplify", s(&a)]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "QCKT 1\nNBITS 2\n");
}

#[test]
fn single_wire_lo_rhs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.qc", "QCKT 1\nNBITS 1\nROT 0 1 0 0 0.3\n");
    let b = write(dir.path(), "b.qc", "QCKT 1\nNBITS 1\nPHASE 0.2\n");
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b)])), 0);
    assert_eq!(code(&dcnot(&["verify", s(&a), s(&b), "--mode", "exact"])), 1);
}
