//! The `waringmat` binary end to end.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_waringmat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn companion_over_gf2_cubes() {
    let o = run(&["decompose", "--field", "2^1", "--k", "3", "--out", "json"], "0 1\n1 1\n");
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["strategy"], "thm3");
    assert_eq!(v["k"], 3);
    assert_eq!(v["B"]["rows"], json!([["1", "0"], ["1", "0"]]));
    assert_eq!(v["C"]["rows"], json!([["1", "1"], ["0", "1"]]));
    for key in ["invertible", "semisimple", "split_semisimple", "cyclic", "idempotent"] {
        assert!(v["certificate"]["B"][key].is_boolean());
    }
}

#[test]
fn nilpotent_sixth_powers_exit_two() {
    let o = run(&["decompose", "--field", "3^1", "--k", "6", "--out", "json"], "0 1\n0 0\n");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_out(&o)["citation"], "Lemma 23class1");
}

#[test]
fn first_powers_are_trivial() {
    let o = run(&["decompose", "--field", "5^1", "--k", "1", "--out", "json"], "3 1 4\n1 0 2\n2 2 2\n");
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["B"]["rows"], json!([["3", "1", "4"], ["1", "0", "2"], ["2", "2", "2"]]));
    assert_eq!(v["C"]["rows"], json!([["0", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]]));
}

#[test]
fn parse_errors_exit_one() {
    let bad_shape = run(&["decompose", "--field", "3", "--k", "2"], "1 2\n3\n");
    assert_eq!(bad_shape.status.code(), Some(1));
    assert!(!bad_shape.stderr.is_empty());
    assert_eq!(run(&["decompose", "--field", "9^1", "--k", "2"], "1").status.code(), Some(1));
    assert_eq!(run(&["decompose", "--field", "3", "--k", "0"], "1").status.code(), Some(1));
    assert_eq!(run(&["decompose", "--field", "3", "--k", "2", "--in", "/nonexistent/file"], "").status.code(), Some(1));
}

#[test]
fn unsupported_exit_three() {
    // GF(2^3) with k = 14: the characteristic divides k, only 0 and 1 are k-th powers,
    // and the 3x3 space is beyond the default budget
    let o = run(&["decompose", "--field", "2^3", "--k", "14"], "g 0 0\n0 g 0\n0 0 1\n");
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn json_file_input_and_seed_determinism() {
    let dir = std::env::temp_dir().join(format!("waringmat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a.json");
    std::fs::write(&path, r#"{"field":"5^1","n":2,"rows":[[1,2],[3,4]]}"#).unwrap();
    let p = path.to_str().unwrap();
    let args = ["decompose", "--k", "2", "--constraint", "invertible-cyclic", "--seed", "9", "--in", p, "--out", "json"];
    let a = run(&args, "");
    let b = run(&args, "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scalar_waring_gf7_cubes() {
    let o = run(&["scalar-waring", "--field", "7^1", "--k", "3", "--out", "json"], "");
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["d"], 3);
    assert_eq!(v["gamma"], 3);
    assert_eq!(v["residues"], json!(["0", "1", "6"]));
}

#[test]
fn ternary_classes() {
    let o = run(&["count", "--field", "3^1", "--n", "2", "--what", "classes", "--out", "json"], "");
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    let rows = v["classes"].as_array().unwrap();
    let labelled: Vec<&Value> = rows.iter().filter(|r| r["label"].is_string()).collect();
    assert_eq!(labelled.len(), 12);
    let total: u64 = rows.iter().map(|r| r["size"].as_u64().unwrap()).sum();
    assert_eq!(total, 81);
}

#[test]
fn census_commands() {
    assert_eq!(run(&["verify-theorem", "--id", "M22"], "").status.code(), Some(0));
    assert_eq!(run(&["verify-theorem", "--id", "M23", "--jobs", "2"], "").status.code(), Some(0));
    assert_eq!(run(&["verify-theorem", "--id", "unknown"], "").status.code(), Some(1));
    assert_eq!(run(&["tables", "--case", "2,3", "--kmax", "24"], "").status.code(), Some(0));
    let o = run(&["count", "--field", "2", "--n", "2", "--what", "cyclic", "--out", "json"], "");
    assert_eq!(json_out(&o)["count"], 5);
    let o = run(&["count", "--field", "2", "--n", "2", "--what", "idempotent", "--out", "json"], "");
    assert_eq!(json_out(&o)["idempotents"], 8);
}

#[test]
fn budget_override() {
    let o = Command::new(env!("CARGO_BIN_EXE_waringmat"))
        .args(["verify-theorem", "--id", "M32"])
        .env("WARINGMAT_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
