// RR-Adam on the ten-component counterexample.

use rr_adam_lab::{adam_run, AdamParams, FiniteSumObjective};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let obj = FiniteSumObjective::zhang_counterexample();
    let params = AdamParams::new(0.9, 0.99, 0.1, 1e-8, 2000, 7);
    let traj = adam_run(&obj, &[-2.0], &params)?;

    for snap in traj.snapshots().iter().step_by(400) {
        println!(
            "epoch {:>5}  w = {:>9.5}  |grad f| = {:.3e}  order {:?}",
            snap.epoch, snap.w_start[0], snap.grad_norm, snap.permutation
        );
    }
    println!("final w = {:?} ({:?})", traj.final_w, traj.status);
    assert!(traj.status.is_completed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
