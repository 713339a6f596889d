use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn prog(name: &str) -> String {
    programs().join(name).display().to_string()
}

fn rwp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwp")).args(args).output().expect("runs")
}

fn solver_available() -> bool {
    let path = std::env::var("RWP_SOLVER").unwrap_or_else(|_| "z3".into());
    Command::new(path).arg("-version").output().is_ok()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn schema_check(v: &Value) {
    let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let reports = match v {
        Value::Array(items) => items.clone(),
        other => vec![other.clone()],
    };
    for r in &reports {
        let errors: Vec<String> = validator.iter_errors(r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?} in {r}");
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&rwp(&["--help"])), 0);
    assert_eq!(code(&rwp(&["--no-such-flag"])), 64);
    assert_eq!(code(&rwp(&["verify-bound", &prog("montecarlo-inner.pw")])), 64);
    let out = rwp(&["verify-bound", "/no/such/file.pw", "--bound", "1"]);
    assert_eq!(code(&out), 64);
    assert!(!out.stderr.is_empty());
    let out = rwp(&["simulate", &prog("montecarlo-inner.pw"), "--post", "count +", "--json"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn verified_bound_reports_json() {
    if !solver_available() {
        return;
    }
    let out = rwp(&["verify-bound", &prog("montecarlo-inner.pw"), "--post", "count", "--bound", "count + 0.85", "--n", "16", "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    schema_check(&v);
    assert_eq!(v["status"], "verified");
    assert_eq!(v["N"], 16);
    assert_eq!(v["transformer"], "uwp");
    assert!(v["query_nodes"].as_u64().unwrap() > 0);
    assert!(v.get("witness").is_none());
}

#[test]
fn refuted_bound_carries_a_witness() {
    if !solver_available() {
        return;
    }
    let out = rwp(&["verify-bound", &prog("montecarlo-inner.pw"), "--post", "count", "--bound", "count + 0.78", "--n", "16", "--json"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    schema_check(&v);
    assert_eq!(v["status"], "refuted");
    assert!(v["witness"]["count"].is_string());

    let out = rwp(&["refute", &prog("montecarlo-wrong.pw"), "--post", "count", "--bound", "count + 0.70", "--max-n", "32"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("witness"));
}

#[test]
fn exhausted_refutation_is_unknown() {
    if !solver_available() {
        return;
    }
    let out = rwp(&["refute", &prog("irwin-hall.pw"), "--post", "x", "--bound", "x + M + 1", "--max-n", "2", "--json"]);
    assert_eq!(code(&out), 2);
    let v = json(&out);
    schema_check(&v);
    assert_eq!(v["status"], "unknown");
    assert!(v["reason"].is_string());
}

#[test]
fn assumptions_are_explicit() {
    if !solver_available() {
        return;
    }
    let p = prog("irwin-hall-conditioned-wlp.pw");
    let out = rwp(&["verify-subinvariant-wlp", &p, "--post", "1", "--n", "2"]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--assume-bounded"));
    let out = rwp(&["verify-subinvariant-wlp", &p, "--post", "1", "--n", "2", "--assume-bounded", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    schema_check(&v);
    assert_eq!(v["assumptions"].as_array().unwrap().len(), 1);
}

#[test]
fn missing_solver_is_internal() {
    let out = rwp(&["--solver", "/no/such/solver", "verify-bound", &prog("montecarlo-inner.pw"), "--post", "count", "--bound", "count + 1"]);
    assert_eq!(code(&out), 70);
}

#[test]
fn simulation_is_reproducible() {
    let args = ["simulate", &prog("montecarlo-inner.pw"), "--post", "count", "--samples", "20000", "--seed", "7", "--json"];
    let a = rwp(&args);
    let b = rwp(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    schema_check(&v);
    let mean = v["estimate"]["mean"].as_f64().unwrap();
    let se = v["estimate"]["std_error"].as_f64().unwrap();
    assert!((mean - std::f64::consts::FRAC_PI_4).abs() <= 4.0 * se, "{mean} +- {se}");

    let out = rwp(&["simulate", &prog("irwin-hall.pw"), "--post", "x", "--state", "i=1, M=4", "--samples", "5000", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("estimated"));
}

#[test]
fn encoding_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.hvl");
    let out = rwp(&["encode", &prog("montecarlo.pw"), "--n", "16", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("coproc montecarlo(") && text.contains("discrete_uniform(16)"), "{text}");
    let out = rwp(&["encode", &prog("montecarlo-inner.pw"), "--n", "1", "--polarity", "demonic"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("proc montecarlo_inner("));
}

#[test]
fn task_files_run_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tasks.toml");
    let body = format!(
        r#"
[defaults]
seed = 3

[[task]]
name = "first"
kind = "simulate"
program = "{mc}"
post = "count"
samples = 2000

[[task]]
name = "second"
kind = "encode"
program = "{mc}"
n = 2

[[task]]
name = "third"
kind = "simulate"
program = "{ih}"
post = "x"
samples = 2000
state = {{ i = "1", M = "2" }}
"#,
        mc = prog("montecarlo-inner.pw"),
        ih = prog("irwin-hall.pw"),
    );
    std::fs::write(&file, body).unwrap();
    let out = rwp(&["--jobs", "3", "--json", "run", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    schema_check(&v);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["task"].as_str().unwrap()).collect();
    assert_eq!(names, ["first", "second", "third"]);
    assert_eq!(v[1]["status"], "encoded");

    std::fs::write(&file, "[[task]]\nkind = \"simulate\"\nprogram = \"x.pw\"\nbogus = 1\n").unwrap();
    assert_eq!(code(&rwp(&["run", file.to_str().unwrap()])), 64);
}

#[test]
fn debug_dir_keeps_scripts() {
    if !solver_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = rwp(&[
        "--debug-dir",
        dir.path().to_str().unwrap(),
        "verify-invariant",
        &prog("irwin-hall.pw"),
        "--post",
        "x",
        "--n",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().any(|n| n.ends_with(".smt2")), "{names:?}");
}
