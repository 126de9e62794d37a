// A JSON-configured sweep written to disk as CSV and JSON.

use rr_adam_lab::harness::{emit, run_experiment, ExperimentConfig, Format};

const CONFIG: &str = r#"{
  "experiment": "custom",
  "objective": {"kind": "quadratic_sum", "n": 2, "d": 1,
                "parameters": {"curvatures": [[1.0], [1.0]], "centers": [[1.0], [-1.0]]}},
  "x0": [3.0],
  "beta1": [0.0, 0.5],
  "beta2": [0.999],
  "eta1": 0.1,
  "seeds": [1, 2],
  "horizon": 200,
  "problem": {"L0": 1.0, "L1": 0.0, "D0": 1.0, "D1": 1.0, "n": 2, "d": 1, "f_gap": 4.5},
  "probe": {"smoothness": true, "alpha": 0.1, "stride": 5}
}"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let report = run_experiment(&cfg)?;
    let out = std::env::temp_dir().join(format!("rr-adam-lab-example-{}", std::process::id()));
    let mut files = emit(&report, Format::Json, &out)?;
    files.extend(emit(&report, Format::Csv, &out)?);
    for run in &report.runs {
        println!(
            "{:<22} tail |grad f| = {:.3e}  bound: {:?}",
            run.run_id,
            run.terminal_grad_norm.unwrap(),
            run.bound.as_ref().map(|b| b.verdict)
        );
    }
    println!("{} files under {}", files.len(), out.display());
    std::fs::remove_dir_all(&out)?;
    assert!(report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
