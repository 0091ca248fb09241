//! The command-line front end, driven in-process: report determinism, exit
//! codes and file output.

use std::path::{Path, PathBuf};

use selfsim::algebra::rat;
use selfsim::cli::{main_with_args, EXIT_INFEASIBLE, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_RESOURCE};
use selfsim::ifs::presets;
use selfsim::surjection::CellMap;
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Runs one command writing to `out`, returning the exit code and the report.
fn run_to(out: &Path, args: &[&str]) -> (i32, String) {
    let mut full = vec!["selfsim".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--output".into());
    full.push(out.display().to_string());
    let code = main_with_args(full);
    (code, std::fs::read_to_string(out).unwrap_or_default())
}

fn run(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(&dir.path().join("report.json"), args);
    (code, serde_json::from_str(&text).unwrap())
}

#[test]
fn dim_reports_ring_and_cut() {
    let k = data("mixed_domain.json");
    let (code, doc) = run(&["dim", &k, "--delta", "1/3", "--level", "5"]);
    assert_eq!(code, EXIT_OK);
    let r = &doc["report"];
    assert_eq!(r["min_poly"], "2x^2+2x-1");
    assert_eq!(r["exponents"], serde_json::json!([1, 1, 2, 2]));
    assert_eq!(r["cut"]["words"], 208);
    assert_eq!(r["cut"]["mass"], "1");
    assert!((r["dimension"].as_f64().unwrap() - 0.914838245584).abs() < 1e-10);
    assert_eq!(doc["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(doc["command"], "dim");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (k, f) = (data("mixed_domain.json"), data("mixed_target.json"));
    let cmds: Vec<Vec<&str>> = vec![
        vec!["surject", "build", &k, &f, "--depth", "1"],
        vec!["surject", "lipschitz", &k, &f, "--depth", "1", "--samples", "500", "--seed", "3"],
        vec!["decompose", &k, &f, "--find-c"],
        vec!["equiv", &k, &f],
    ];
    for (i, args) in cmds.iter().enumerate() {
        let a = run_to(&dir.path().join(format!("a{i}.json")), args);
        let b = run_to(&dir.path().join(format!("b{i}.json")), args);
        assert_eq!(a.0, EXIT_OK, "{args:?}");
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn surject_commands() {
    let (k, f) = (data("mixed_domain.json"), data("mixed_target.json"));
    let (code, doc) = run(&["surject", "verify", &k, &f, "--depth", "2", "--samples", "200"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["report"]["step_c"], 4);
    for l in doc["report"]["levels"].as_array().unwrap() {
        assert_eq!(l["c_tilde"], "1");
        assert_eq!(l["surjective"], true);
    }
    let (code, doc) = run(&["surject", "eval", &k, &f, "--depth", "2", "--address", "2413312424131"]);
    assert_eq!(code, EXIT_OK);
    let imgs = doc["report"]["images"].as_array().unwrap();
    let (j1, j2) = (imgs[0]["target"].as_str().unwrap(), imgs[1]["target"].as_str().unwrap());
    assert!(j2.starts_with(j1));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pairs.csv");
    let (code, _) = run_to(
        &dir.path().join("r.json"),
        &["surject", "lipschitz", &k, &f, "--depth", "1", "--samples", "50", "--csv", &csv.display().to_string()],
    );
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert!(text.starts_with("x,x',gx,gx',ratio"));
}

#[test]
fn decompose_groups_the_third_level() {
    let (code, doc) = run(&["decompose", &data("mixed_domain.json"), &data("mixed_target.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["report"]["word_length"], 3);
    assert_eq!(doc["report"]["groups"].as_array().unwrap().len(), 28);
}

#[test]
fn equiv_with_hypothesis() {
    let (code, doc) = run(&["equiv", &data("three_ninths.json"), &data("mixed_ninths.json"), "--hypothesis", "homogeneous-domain"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["report"]["status"], "equivalent");
    assert_eq!(doc["report"]["certificate"]["exponents"], serde_json::json!([1, 1, 2, 2, 2]));
    let (code, doc) = run(&["equiv", &data("cantor.json"), &data("cantor.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["report"]["status"], "equivalent");
}

#[test]
fn localize_reads_a_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = CellMap::identity(&presets::cantor(), rat(1, 3), 3).unwrap();
    let path: PathBuf = dir.path().join("map.json");
    std::fs::write(&path, map.to_json()).unwrap();
    let (code, doc) = run(&["localize", &path.display().to_string(), "--epsilon", "0.1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(doc["report"]["q"], 1);
    assert_eq!(doc["report"]["attained"], true);
}

#[test]
fn exit_codes() {
    let k = data("mixed_domain.json");
    let f = data("mixed_target.json");
    assert_eq!(run(&["dim", &data("missing.json")]).0, EXIT_PARSE);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (code, doc) = run(&["dim", &bad.display().to_string()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(doc["error"].is_string());

    // Equal dimension is a precondition of the surjection.
    assert_eq!(run(&["surject", "build", &k, &data("three_ninths.json")]).0, EXIT_PRECONDITION);
    assert_eq!(run(&["decompose", &k, &f, "--find-c", "--c-max", "3"]).0, EXIT_INFEASIBLE);
    assert_eq!(run(&["dim", &k, "--delta", "1/3", "--level", "12", "--word-budget", "100"]).0, EXIT_RESOURCE);
    assert_eq!(run(&["surject", "build", &k, &f, "--c", "zero"]).0, EXIT_PARSE);

    // Argument errors never reach a report.
    assert_eq!(main_with_args(["selfsim", "surject", "build"]), EXIT_PARSE);
    assert_eq!(main_with_args(["selfsim", "--help"]), EXIT_OK);
}
