//! Drive a whole pipeline from a JSON spec and write its report, the way the
//! `hdx run` command does.

use hdx_cover::harness::{emit_report, run_experiment, to_json, ExperimentSpec};

const SPEC: &str = r#"{
  "seed": 11,
  "pipeline": "prune",
  "complex": {"complete": {"n": 24, "d": 2}},
  "group": {"kind": "cyclic", "n": 5},
  "genset": [1, 4, 2, 3],
  "config": {"lambda": 0.95, "r": 2.5, "c": 1.0, "eta": 0.0, "ne_threshold": 0.95,
             "at_min_expected": 4.0, "max_resamples": 10000, "record_scopes": false}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec: ExperimentSpec = serde_json::from_str(SPEC)?;
    let run = run_experiment(&spec)?;
    println!("status {:?} (exit code {})", run.report.status, run.report.status.exit_code());
    for a in &run.report.audits {
        println!("  {:<30} {}", a.name, if a.pass { "pass" } else { "FAIL" });
    }
    let dir = std::env::temp_dir().join("hdx-experiment");
    emit_report(&dir, &run)?;
    // same spec, same bytes
    let again = run_experiment(&spec)?;
    println!("deterministic: {}", to_json(&again.report) == to_json(&run.report));
    println!("wrote {}", dir.display());
    Ok(())
}
