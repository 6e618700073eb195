//! Drives the check and sweep commands from a JSON configuration, the same
//! path the command-line tool takes.

use seqkraus::commands::{cmd_check, cmd_sweep};
use seqkraus::config::RunConfig;

const CONFIG: &str = r#"{
    "system": {
        "kind": "inline",
        "state": [[0.8, 0.0], [0.0, 0.6]],
        "a": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
        "b": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]
    },
    "lambda_a": {"start": 0.001, "stop": 10, "points": 5, "log": true},
    "lambda_b": 1.0,
    "samples": 20000,
    "seed": 42
}"#;

pub fn run_example() -> seqkraus::Result<()> {
    let config = RunConfig::from_json(CONFIG)?;
    let report = cmd_check(&config)?;
    print!("{}", report.to_text());
    assert!(report.passed());
    print!("{}", cmd_sweep(&config)?.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> seqkraus::Result<()> {
    run_example()
}
