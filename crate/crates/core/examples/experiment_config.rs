//! Describe an experiment in JSON and drive it through the command-line
//! front end in-process.
//!
//! ```bash
//! cargo run --example experiment_config
//! ```

use minimax_bvp::cli;
use minimax_bvp::config::ExperimentConfig;

const EXPERIMENT: &str = r#"{
  "system": {
    "omega": "2*pi",
    "a": [["0", "1"], ["-1", "0"]],
    "b": [["1", "0"], ["0", "1"]],
    "h": [["sin(t)/20", "cos(t)/20"], ["sin(t)/2", "cos(t)/2"]]
  },
  "grid": { "steps": 1024 },
  "functional": ["sin(t)", "cos(t)"],
  "tolerances": { "rank_tol": 1e-8 }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(EXPERIMENT)?;
    let exp = cfg.build(None)?;
    println!(
        "n = {}, m = {}, N = {}",
        exp.system.n(),
        exp.system.m(),
        exp.grid.steps()
    );

    let dir = std::env::temp_dir().join("minimax-bvp-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("experiment.json");
    std::fs::write(&path, cfg.to_json())?;

    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["minimax-bvp", "check", "--config", path.to_str().unwrap()];
    let code = cli::run(args, &mut out, &mut err);
    println!("check exited {code}:\n{}", String::from_utf8_lossy(&out));

    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = [
        "minimax-bvp",
        "estimate",
        "--builtin",
        "singular-l1",
        "--grid-steps",
        "512",
    ];
    let code = cli::run(args, &mut out, &mut err);
    println!(
        "estimate on an infeasible functional exited {code}:\n{}",
        String::from_utf8_lossy(&out)
    );

    match ExperimentConfig::from_json(r#"{"system": {"omega": 1, "a": [[1]], "b": [[1]], "h": [[true]]}}"#) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected config: {e}"),
    }
    Ok(())
}
