// The limiting gradient norm shrinks as beta2 approaches 1 but stays positive.

use rr_adam_lab::harness::{run_fig3, Experiment, ExperimentConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::defaults(Experiment::Fig3);
    cfg.keep_trajectories = false;
    let report = run_fig3(&cfg)?;

    println!("{:<28} {:>14}", "run", "tail |grad f|");
    for run in &report.runs {
        println!("{:<28} {:>14.4e}", run.run_id, run.terminal_grad_norm.unwrap());
    }
    for c in &report.conclusions {
        println!("{:<20} {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }
    assert!(report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
