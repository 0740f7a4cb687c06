use std::path::PathBuf;
use std::process::{Command, Output};

use grasswig::cli::{parse_circuit, serialize_circuit, EXIT_DISAGREE, EXIT_OK, EXIT_PARSE, EXIT_REFUSED};
use grasswig::oracle::Circuit;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("grasswig-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn grasswig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grasswig")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn bell_all_engines_agree() {
    let file = scratch("bell.txt", "qubits 2\nh 0\ncnot 0 1\n");
    let json = file.with_extension("json");
    let out = grasswig(&["run", file.to_str().unwrap(), "--engine", "all", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["agreement"]["verdict"], "PASS");
    let gbar = report["gbar"].as_object().unwrap();
    let support: Vec<&str> = gbar.iter().filter(|(_, v)| v.as_f64().unwrap() > 0.0).map(|(k, _)| k.as_str()).collect();
    assert_eq!(support, ["+XX", "+ZZ", "-YY"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("agreement: Pass"));
}

#[test]
fn t_gate_is_refused() {
    let file = scratch("t.txt", "qubits 1\nt 0\n");
    let json = file.with_extension("json");
    let out = grasswig(&["run", file.to_str().unwrap(), "--engine", "threegen", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_REFUSED);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["refusal"]["classification"], "hbar1_general");
    assert_eq!(code(&grasswig(&["run", file.to_str().unwrap(), "--engine", "tableau"])), EXIT_REFUSED);
    assert_eq!(code(&grasswig(&["run", file.to_str().unwrap(), "--engine", "dense"])), EXIT_OK);
}

#[test]
fn empty_circuit_dense() {
    let file = scratch("empty.txt", "qubits 3\n");
    let json = file.with_extension("json");
    let out = grasswig(&["run", file.to_str().unwrap(), "--engine", "dense", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["dense_group"].as_array().unwrap().len(), 7);
    assert_eq!(report["negativity"], 0.0);
}

#[test]
fn parse_errors_report_location() {
    let file = scratch("bad.txt", "qubits 2\ncnot 0 2\n");
    let out = grasswig(&["run", file.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_PARSE);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 8"));
}

#[test]
fn contextuality_json() {
    let json = scratch("ctx.json", "");
    let out = grasswig(&["contextuality", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r["row_products"], serde_json::json!([1, 1, 1]));
    assert_eq!(r["column_triple_product"], -1);
    assert_eq!(r["assignments_found"], 0);
    assert!(r["single_qubit_analog_found"].as_u64().unwrap() > 0);
    assert_eq!(r["preparation"][0]["verdict"], "rule sets identical");
}

#[test]
fn selftest_passes() {
    let out = grasswig(&["selftest", "--circuits", "40", "--qubits", "3", "--seed", "5"]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(String::from_utf8_lossy(&out.stdout).contains("passed 40/40"));
    assert_ne!(EXIT_OK, EXIT_DISAGREE);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(code(&grasswig(&["frobnicate"])), 2);
}

proptest! {
    #[test]
    fn serialize_round_trip(seed in any::<u64>(), n in 1usize..=5, len in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Circuit::random_clifford(n, len, &mut rng);
        prop_assert_eq!(parse_circuit(&serialize_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn parse_is_total(text in "[a-zQ#0-9 \t\n]{0,60}") {
        // every input either parses or names a line that exists
        if let Err(e) = parse_circuit(&text) {
            prop_assert!(e.line >= 1 && e.line <= text.lines().count().max(1));
            prop_assert!(e.column >= 1);
        }
    }
}
