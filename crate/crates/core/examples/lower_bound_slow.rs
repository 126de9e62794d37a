// Gradient descent below eta* on the lower-bound landscape keeps the
// gradient above eps for slow_horizon steps.

use rr_adam_lab::gd_run;
use rr_adam_lab::landscapes::make_lowerbound;
use rr_adam_lab::theory::Thm2Construction;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (l0, l1, m) = (1.0, 1.0, 100.0);
    let (obj, w0, c) = make_lowerbound(l0, l1, 10_000, m, Thm2Construction::natural_f_bar(l0, l1, m))?;
    println!("eps = {:.4}, slow_horizon = {} (T = {})", c.epsilon, c.slow_horizon, c.horizon);

    for factor in [0.1, 0.5] {
        let traj = gd_run(&obj, &w0, factor * c.eta_star, c.slow_horizon)?;
        let min = traj.snapshots().iter().map(|s| s.grad_norm).fold(f64::INFINITY, f64::min);
        println!(
            "{factor:>4} x eta*: min |grad f| = {min:.6}, final w = ({:.3e}, {:.3})",
            traj.final_w[0], traj.final_w[1]
        );
        assert!(min >= c.epsilon);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
