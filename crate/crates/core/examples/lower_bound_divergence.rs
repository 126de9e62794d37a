// Gradient descent at or above eta* on the lower-bound landscape: |x| grows
// by at least sqrt(2) per step until it overflows.

use rr_adam_lab::gd_run;
use rr_adam_lab::harness::log_growth;
use rr_adam_lab::landscapes::make_lowerbound;
use rr_adam_lab::theory::Thm2Construction;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (l0, l1, m) = (1.0, 1.0, 100.0);
    let (obj, w0, c) = make_lowerbound(l0, l1, 10_000, m, Thm2Construction::natural_f_bar(l0, l1, m))?;
    println!("eps = {:.4}, eta* = {:.4}, w0 = {:?}", c.epsilon, c.eta_star, w0);

    for factor in [1.0, 1.05, 2.0] {
        let traj = gd_run(&obj, &w0, factor * c.eta_star, 10_000)?;
        let xs: Vec<String> = traj.iterates().iter().map(|w| format!("{:.3e}", w[0])).collect();
        let growth = log_growth(&traj);
        println!("{factor:>5} x eta*: x = [{}]  -> {:?}", xs.join(", "), traj.status);
        assert!(growth.iter().all(|g| *g >= 0.5 * std::f64::consts::LN_2 - 1e-9));
        assert!(!traj.status.is_completed());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
