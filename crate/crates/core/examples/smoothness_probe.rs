// Local smoothness along a GD trajectory and the fitted (L0, L1) relation,
// plus the affine noise envelope of the counterexample.

use rr_adam_lab::landscapes::make_lowerbound;
use rr_adam_lab::probes::{affine_noise_fit, l0l1_fit, probe_trajectory, DEFAULT_ALPHA};
use rr_adam_lab::theory::Thm2Construction;
use rr_adam_lab::{gd_run, FiniteSumObjective};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (obj, w0, c) = make_lowerbound(1.0, 1.0, 10_000, 100.0, Thm2Construction::natural_f_bar(1.0, 1.0, 100.0))?;
    let traj = gd_run(&obj, &w0, 0.1 * c.eta_star, 200)?;
    let probes = probe_trajectory(&obj, &traj, DEFAULT_ALPHA, 1)?;
    let pairs: Vec<(f64, f64)> = probes
        .iter()
        .flatten()
        .filter_map(|p| p.smoothness.map(|s| (p.grad_norm, s.estimate)))
        .collect();
    for (g, s) in pairs.iter().step_by(40) {
        println!("|grad f| = {g:>10.4}  local smoothness = {s:>10.4}");
    }
    let fit = l0l1_fit(&pairs)?;
    println!(
        "log-log slope {:.3} (r^2 {:.3}); envelope L0 = {:.4}, L1 = {:.4}",
        fit.log_log_slope, fit.r_squared, fit.l0_hat, fit.l1_hat
    );

    let zhang = FiniteSumObjective::zhang_counterexample();
    let grid: Vec<Vec<f64>> = (0..=200).map(|i| vec![-10.0 + 0.1 * i as f64]).collect();
    let noise = affine_noise_fit(&zhang, &grid)?;
    println!(
        "noise envelope: D0 = {:.4}, D1 = {:.1}, max violation = {:.1e}",
        noise.d0_hat, noise.d1_hat, noise.max_violation
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
