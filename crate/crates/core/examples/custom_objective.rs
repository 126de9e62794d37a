// A user-supplied finite sum: three shifted log-cosh components in 2-D.

use std::sync::Arc;

use rr_adam_lab::landscapes::CustomObjective;
use rr_adam_lab::{adam_run, AdamParams, FiniteSumObjective};

const SHIFTS: [[f64; 2]; 3] = [[1.0, 0.0], [-1.0, 2.0], [0.5, -1.0]];

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let custom = CustomObjective {
        name: "log-cosh".into(),
        value: Arc::new(|j, w| {
            w.iter()
                .zip(&SHIFTS[j])
                .map(|(x, s)| (x - s).cosh().ln())
                .sum()
        }),
        grad: Arc::new(|j, w| w.iter().zip(&SHIFTS[j]).map(|(x, s)| (x - s).tanh()).collect()),
        curvature: None,
    };
    let obj = FiniteSumObjective::custom(3, 2, custom)?;
    let params = AdamParams::new(0.9, 0.999, 0.5, 1e-8, 3000, 1);
    let traj = adam_run(&obj, &[5.0, -4.0], &params)?;
    let last = traj.snapshots().last().unwrap();
    println!("after {} epochs: w = {:?}, |grad f| = {:.3e}", last.epoch, traj.final_w, last.grad_norm);
    println!("analytic smoothness available: {:?}", obj.analytic_smoothness(&traj.final_w)?);
    assert!(last.grad_norm < 0.1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
