// A GD step-size grid straddling eta* against RR-Adam on the same landscape.

use rr_adam_lab::harness::{run_comparison, Experiment, ExperimentConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::defaults(Experiment::AdamVsGd);
    cfg.keep_trajectories = false;
    let report = run_comparison(&cfg)?;
    let c = report.construction.as_ref().unwrap();
    println!("eps = {:.4}, eta* = {:.4}", c.epsilon, c.eta_star);

    for run in &report.runs {
        let crossing = run.metrics.get("first_crossing_epoch");
        println!(
            "{:<28} eta1 = {:<8.4} {:?} min |grad f| = {:.3e} first crossing = {:?}",
            run.run_id,
            run.eta1,
            run.status.unwrap(),
            run.min_grad_norm.unwrap(),
            crossing
        );
    }
    assert!(report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
