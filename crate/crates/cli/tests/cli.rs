use std::process::{Command, Output};

use serde_json::Value;

fn lstr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lstr"))
        .args(args)
        .env_remove("LATTICE_STRINGS_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const PLAQUETTE: &str = "+1 +2 -1 -2";

#[test]
fn plaquette_first_coefficient() {
    let out = lstr(&["coeff", "--dim", "2", "--loop", PLAQUETTE, "--k", "0", "--imax", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "lstr/coeff/1");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["a"], "0/1");
    assert_eq!(rows[1]["a"], "1/1");
    assert_eq!(rows[1]["b"], "1/1");
}

#[test]
fn symmetrized_rows_match() {
    let args = ["coeff", "--dim", "2", "--loop", "+1 +1 +2 -1 -1 -2", "--kmax", "1", "--imax", "2", "--which", "a"];
    let plain = json(&lstr(&args));
    let mut sym_args = args.to_vec();
    sym_args.push("--symmetrized");
    let sym = json(&lstr(&sym_args));
    assert_eq!(plain["rows"], sym["rows"]);
    assert_eq!(plain["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn expand_outside_regime_warns() {
    let out = lstr(&["expand", "--dim", "2", "--loop", PLAQUETTE, "--beta", "1/100000000", "--imax", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["partial_sum"], "1/100000000");
    assert_eq!(v["result"]["rigorous"], false);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn expand_inside_regime_has_tail() {
    let out = lstr(&["expand", "--dim", "2", "--loop", PLAQUETTE, "--beta", "1e-40"]);
    let v = json(&out);
    assert_eq!(v["result"]["rigorous"], true);
    assert_eq!(v["result"]["growth_ok"], true);
    assert!(v["result"]["tail_bound"].is_string());
    assert!(v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn bad_loop_is_json_error() {
    let out = lstr(&["coeff", "--dim", "2", "--loop", "+1 +1", "--k", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "loop");
    assert!(v["error"]["message"].as_str().unwrap().contains("closed"));
}

#[test]
fn usage_error_is_json() {
    let out = lstr(&["mc", "--dim", "2", "--loop", PLAQUETTE, "--N", "3", "--beta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "usage");
}

#[test]
fn trajectories_of_plaquette() {
    let out = lstr(&["trajectories", "--dim", "2", "--loop", PLAQUETTE, "--i", "1", "--k", "0", "--list"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["T"], "1/1");
    assert_eq!(v["S"], "1/1");
    assert_eq!(v["count"], 4);
    let listed = v["trajectories"].as_array().unwrap();
    assert_eq!(listed.len(), 4);
    assert_eq!(listed[0]["weight_den"], "4");
}

#[test]
fn trajectories_independent_of_threads() {
    let base = ["trajectories", "--dim", "2", "--loop", "+1 +1 +2 -1 -1 -2", "--i", "2", "--k", "1", "--list"];
    let one = lstr(&base);
    let mut more = base.to_vec();
    more.extend(["--threads", "3"]);
    let three = lstr(&more);
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn mc_is_deterministic_and_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("samples.csv");
    let csv_arg = csv.to_str().unwrap();
    let args = [
        "mc", "--dim", "2", "--loop", PLAQUETTE, "--N", "3", "--beta", "0.2", "--box", "4", "--sweeps", "300",
        "--warmup", "50", "--seed", "11", "--samples-csv", csv_arg,
    ];
    let a = lstr(&args);
    let b = lstr(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["N"], 3);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["estimates"][0]["name"], "phi");
    let mean = v["estimates"][0]["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 1.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("chain,index,phi"));
    assert!(text.lines().count() > 2);
}

#[test]
fn check_duality_reports_equality() {
    let out = lstr(&["check", "duality", "--max-length", "4", "--imax", "2", "--kmax", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["all_equal"], true);
    assert!(v["reports"][0]["cases"].as_u64().unwrap() > 0);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested").join("cache.json");
    let args = ["coeff", "--dim", "2", "--loop", "+1 +1 +2 -1 -1 -2", "--kmax", "1", "--imax", "2", "--cache", path.to_str().unwrap()];
    let first = lstr(&args);
    assert!(path.exists());
    let second = lstr(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = lstr(&["coeff", "--dim", "2", "--loop", PLAQUETTE, "--k", "0", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}
