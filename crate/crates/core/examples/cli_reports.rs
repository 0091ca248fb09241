// Drives the command-line front end in-process over the bundled data files
// and prints each command's exit code and verdict line.

use selfsim::cli::{run, RunConfig};
use clap::Parser;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (k, f) = (data("mixed_domain.json"), data("mixed_target.json"));
    let commands: Vec<Vec<String>> = vec![
        vec!["dim".into(), k.clone(), "--delta".into(), "1/3".into(), "--level".into(), "5".into()],
        vec!["equiv".into(), data("three_ninths.json"), data("mixed_ninths.json")],
        vec!["decompose".into(), k.clone(), f.clone()],
        vec!["decompose".into(), k.clone(), f.clone(), "--find-c".into()],
        vec!["surject".into(), "verify".into(), k.clone(), f.clone(), "--depth".into(), "1".into()],
        vec!["surject".into(), "eval".into(), k.clone(), f.clone(), "--address".into(), "2413312424131".into()],
        vec!["equiv".into(), k.clone(), data("missing.json")],
    ];
    for args in commands {
        let cfg = RunConfig::try_parse_from(std::iter::once("selfsim".to_string()).chain(args.iter().cloned()))?;
        let (code, text) = run(&cfg);
        let doc: serde_json::Value = serde_json::from_str(&text)?;
        let verdict = doc.get("passed").map_or_else(|| format!("error: {}", doc["error"]), |p| format!("passed: {p}"));
        println!("[{code}] {:<18} {verdict}", doc["command"].as_str().unwrap_or("?"));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
