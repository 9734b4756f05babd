//! End-to-end pipeline through the binary: generate, validate, solve,
//! oracle, certify, export and bench.

use std::path::Path;
use std::process::{Command, Output};

fn wsps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn full_pipeline_on_a_tiny_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = path_str(dir.path(), "tiny.json");

    let out = wsps(&[
        "generate",
        "--synthetic-nodes", "14",
        "--synthetic-candidates", "4",
        "--network-seed", "4",
        "--warehouses", "2",
        "--factories", "2",
        "--customers", "2",
        "--capacity-class", "l",
        "--seed", "4",
        "--out", &instance,
    ]);
    assert_success(&out, "generate");

    let out = wsps(&["validate", "--instance", &instance]);
    assert_success(&out, "validate instance");

    let solved = path_str(dir.path(), "solved.json");
    let params = path_str(dir.path(), "params.json");
    std::fs::write(&params, r#"{"iterations": 2000, "segment_length": 100}"#).unwrap();
    let out = wsps(&[
        "solve",
        "--instance", &instance,
        "--variant", "wspsdp",
        "--seed", "1",
        "--params", &params,
        "--out", &solved,
    ]);
    assert_success(&out, "solve");

    let out = wsps(&["validate", "--instance", &instance, "--solution", &solved]);
    assert_success(&out, "validate solution");

    let oracle = path_str(dir.path(), "oracle.json");
    let out = wsps(&["oracle", "--instance", &instance, "--out", &oracle]);
    assert_success(&out, "oracle");

    // The oracle solution certifies against the exported model.
    let report = path_str(dir.path(), "certify.json");
    let out = wsps(&[
        "certify",
        "--instance", &instance,
        "--solution", &oracle,
        "--out", &report,
    ]);
    assert_success(&out, "certify");
    assert!(dir.path().join("certify.json").exists());

    let lp = path_str(dir.path(), "model.lp");
    let out = wsps(&["export-milp", "--instance", &instance, "--out", &lp]);
    assert_success(&out, "export-milp");
    let text = std::fs::read_to_string(dir.path().join("model.lp")).unwrap();
    assert!(text.starts_with("\\ "));
    assert!(text.contains("Minimize"));
    assert!(text.trim_end().ends_with("End"));

    // Heuristic total can never beat the oracle total.
    let solved_text = std::fs::read_to_string(&solved).unwrap();
    let oracle_text = std::fs::read_to_string(&oracle).unwrap();
    let solved_json: serde_json::Value = serde_json::from_str(&solved_text).unwrap();
    let oracle_json: serde_json::Value = serde_json::from_str(&oracle_text).unwrap();
    let h = solved_json["cost"]["total"].as_f64().unwrap();
    let o = oracle_json["cost"]["total"].as_f64().unwrap();
    assert!(h >= o - 1e-9, "heuristic {h} below oracle {o}");
}

#[test]
fn bench_runs_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let manifest = serde_json::json!({
        "instances": [{
            "kind": "generate",
            "network": {"kind": "synthetic", "nodes": 14, "candidates": 4, "seed": 4},
            "spec": {
                "num_warehouses": 2, "num_factories": 2, "num_customers": 2,
                "capacity_class": "large", "seed": 4
            }
        }],
        "variants": ["wspsdp", "wsps_sa", "wsps_wi"],
        "params": {"iterations": 500, "segment_length": 100},
        "replications": 2,
        "output_dir": out_dir.display().to_string()
    });
    let manifest_path = path_str(dir.path(), "manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();

    let out = wsps(&["bench", "--manifest", &manifest_path, "--jobs", "2"]);
    assert_success(&out, "bench");
    assert!(out_dir.join("results.csv").exists());
    assert!(out_dir.join("swi_by_capacity.csv").exists());
    assert!(out_dir.join("time_by_size.csv").exists());
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 2);
}

#[test]
fn broken_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown flag.
    let out = wsps(&["solve", "--no-such-flag"]);
    assert!(!out.status.success());
    // Missing file.
    let out = wsps(&["validate", "--instance", &path_str(dir.path(), "missing.json")]);
    assert!(!out.status.success());
    // Malformed instance.
    let bad = path_str(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"version\": 1}").unwrap();
    let out = wsps(&["validate", "--instance", &bad]);
    assert!(!out.status.success());
    // Unknown format version.
    let worse = path_str(dir.path(), "v9.json");
    std::fs::write(
        &worse,
        r#"{"version": 9, "nodes": [], "distance": [], "flows": [], "warehouses": [], "vehicle_capacity": 1.0, "alpha": 0.0, "beta": 1.0}"#,
    )
    .unwrap();
    let out = wsps(&["validate", "--instance", &worse]);
    assert!(!out.status.success());
}

#[test]
fn invalid_instance_reports_violations_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Structurally parseable but invalid: zero vehicle capacity.
    let bad = path_str(dir.path(), "invalid.json");
    std::fs::write(
        &bad,
        serde_json::to_string(&serde_json::json!({
            "version": 1,
            "nodes": [
                {"id": 0, "role": "warehouse"},
                {"id": 1, "role": "factory"},
                {"id": 2, "role": "customer"}
            ],
            "distance": [[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]],
            "flows": [[1, 2, 3.0]],
            "warehouses": [{"id": 0, "capacity": 10.0, "unit_cost": 0.1}],
            "vehicle_capacity": 0.0,
            "alpha": 0.001,
            "beta": 1.0
        }))
        .unwrap(),
    )
    .unwrap();
    let out = wsps(&["validate", "--instance", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("vehicle capacity"), "stderr: {stderr}");
}
