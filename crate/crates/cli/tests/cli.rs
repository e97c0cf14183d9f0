use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sosp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sosp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn instance(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn simple(dir: &Path) -> PathBuf {
    instance(dir, "simple.json", r#"{"n": 1, "C": [2, 2]}"#)
}

fn nodes(v: &Value) -> Vec<u64> {
    v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn gen_summarizes_the_simple_instance() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let out = sosp(&["gen", "--instance", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["N"], 18);
    assert_eq!(nodes(&v["columns"]), vec![1]);
    assert_eq!(nodes(&v["solutions"]), vec![1]);
    assert_eq!(v["brute_solution"], 1);
    assert_eq!(v["lipschitz"]["stated"]["l"], 128.0 * 18.0);
}

#[test]
fn gen_rejects_a_fixed_first_node() {
    let dir = TempDir::new().unwrap();
    let path = instance(dir.path(), "bad.json", r#"{"n": 1, "C": [1, 2]}"#);
    let out = sosp(&["gen", "--instance", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("C(1)"));
}

#[test]
fn gen_finds_both_solutions_of_the_five_node_example() {
    // Nodes 1..5 as in the five-node diagram, padded with fixed points 6..8.
    let dir = TempDir::new().unwrap();
    let path = instance(dir.path(), "five.json", r#"{"n": 3, "C": [2, 3, 4, 4, 1, 6, 7, 8]}"#);
    let out = sosp(&["gen", "--instance", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let solutions = nodes(&json(&out)["solutions"]);
    assert!(solutions.contains(&3) && solutions.contains(&5), "{solutions:?}");
}

#[test]
fn verify_with_infinite_tolerances_always_passes() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let out = sosp(&["verify", "--instance", path.to_str().unwrap(), "--point", "10.5,2", "--eps-g", "inf", "--eps-h", "inf"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["report"]["pass"], true);
}

#[test]
fn verify_fails_on_the_black_corridor() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let out = sosp(&["verify", "--instance", path.to_str().unwrap(), "--point", "21/2,2"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["report"]["first_order"], false);
    assert!(v["report"]["prox_norm"].as_f64().unwrap() > 1e-10);
    assert_eq!(v["cell"], serde_json::json!([10, 2]));
}

#[test]
fn verify_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let p = path.to_str().unwrap();
    assert_eq!(code(&sosp(&["verify", "--instance", p, "--point", "19,2"])), 2);
    assert_eq!(code(&sosp(&["verify", "--instance", p, "--point", "3,2", "--precision", "rational"])), 2);
    assert_eq!(code(&sosp(&["verify", "--instance", p, "--point", "3,2", "--precision", "64"])), 2);
    assert_eq!(code(&sosp(&["verify", "--instance", p, "--point", "3"])), 2);
}

#[test]
fn solve_then_verify_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let p = path.to_str().unwrap();
    let out = sosp(&["solve", "--instance", p, "--start", "0.9,0.9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["status"], "Terminal");
    assert_eq!(v["decoded_solution"], 1);
    let exact: Vec<&str> = v["point_exact"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    let point = exact.join(",");
    let check = sosp(&["verify", "--instance", p, "--scale", "moderate", "--point", &point]);
    assert_eq!(code(&check), 0);
    assert_eq!(json(&check)["decoded_solution"], 1);
}

#[test]
fn render_is_deterministic_and_counts_blue_points() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    let out = sosp(&["render", "--instance", path.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&sosp(&["render", "--instance", path.to_str().unwrap(), "--out", b.to_str().unwrap()])), 0);
    let svg = std::fs::read(&a).unwrap();
    assert_eq!(svg, std::fs::read(&b).unwrap());
    // One blue column of 3 × 6 points plus its base point.
    let text = String::from_utf8(svg).unwrap();
    assert_eq!(text.matches(r#"<g class="blue""#).count(), 19);
    assert_eq!(json(&out)["colors"]["Blue"], 19);
}

#[test]
fn render_rejects_large_instances() {
    let dir = TempDir::new().unwrap();
    let table: Vec<String> = (0..128u64).map(|v| (v + 2).min(128).to_string()).collect();
    let path = instance(dir.path(), "big.json", &format!(r#"{{"n": 7, "C": [{}]}}"#, table.join(",")));
    let svg = dir.path().join("big.svg");
    assert_eq!(code(&sosp(&["render", "--instance", path.to_str().unwrap(), "--out", svg.to_str().unwrap()])), 2);
}

#[test]
fn reduce_reports_no_violations() {
    for args in [vec!["--objective", "saddle"], vec!["--objective", "double-well", "--cut"]] {
        let mut full = vec!["reduce", "--samples", "100", "--seed", "3"];
        full.extend(args);
        let out = sosp(&full);
        assert_eq!(code(&out), 0);
        let v = json(&out);
        assert_eq!(v["verdicts"]["violation"], 0);
        let total: u64 = ["solution", "improved_by_decrease", "improved_by_active_set"]
            .iter()
            .map(|k| v["verdicts"][k].as_u64().unwrap())
            .sum();
        assert_eq!(total, 100);
    }
}

#[test]
fn reduce_is_deterministic_per_seed() {
    let run = || sosp(&["reduce", "--samples", "50", "--seed", "9"]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn classify_single_cells() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let p = path.to_str().unwrap();
    let corridor = sosp(&["classify", "--instance", p, "--cell", "10,2", "--resolution", "21"]);
    assert_eq!(code(&corridor), 0);
    assert_eq!(json(&corridor)["certified"], true);
    let top = sosp(&["classify", "--instance", p, "--cell", "4,8", "--resolution", "21"]);
    assert_eq!(code(&top), 1);
    let v = json(&top);
    assert_eq!(v["label"]["group"], "X");
    assert_eq!(v["certified"], false);
    assert_eq!(code(&sosp(&["classify", "--instance", p, "--cell", "18,0"])), 2);
}

#[test]
fn bench_times_every_path() {
    let dir = TempDir::new().unwrap();
    let path = simple(dir.path());
    let out = sosp(&["bench", "--instance", path.to_str().unwrap(), "--samples", "20"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for key in ["f64", "hp", "rational"] {
        assert_eq!(v[key]["evaluations"], 20, "{key}");
    }
}
