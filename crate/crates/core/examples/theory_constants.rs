// Closed-form constants, the beta2 threshold, and the either/or Adam bound
// evaluated on a two-component quadratic.

use rr_adam_lab::theory::{
    check_theorem1, compute_constants, eta1_feasible, g_of_beta2, gamma_threshold, theorem1_rhs,
    ProblemConstants,
};
use rr_adam_lab::{adam_run, AdamParams, FiniteSumObjective};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // f = ((w-1)^2 + (w+1)^2) / 4: D0 = D1 = 1, L0 = 1, L1 = 0
    let obj = FiniteSumObjective::quadratic_sum(vec![vec![1.0], vec![1.0]], vec![vec![1.0], vec![-1.0]])?;
    let w0 = [3.0];
    let pc = ProblemConstants {
        l0: 1.0,
        l1: 0.0,
        d0: 1.0,
        d1: 1.0,
        n: 2,
        d: 1,
        f_gap: obj.value(&w0)? - obj.known_min().unwrap(),
    };
    let (beta1, beta2, eta1) = (0.0, 0.999, 0.1);

    let gamma = gamma_threshold(pc.d1, pc.n, pc.d, beta1)?;
    println!("g(beta2) = {:.4e}, gamma(D1) = {gamma:.6}", g_of_beta2(beta2, pc.n)?);
    let tc = compute_constants(beta1, beta2, pc.n, pc.d, eta1, &pc)?;
    for (i, c) in tc.as_array().iter().enumerate() {
        println!("C{:<2} = {c:.6e}", i + 1);
    }
    let feas = eta1_feasible(&tc, eta1, pc.d, pc.l1, pc.d1);
    println!("eta1 feasible: {} ({:?})", feas.feasible, feas);

    for t in [100, 1000] {
        let rhs = theorem1_rhs(t, &tc, &pc, eta1, 1e-8, beta1, beta2)?;
        let params = AdamParams::new(beta1, beta2, eta1, 1e-8, t, 11);
        let traj = adam_run(&obj, &w0, &params)?;
        let report = check_theorem1(&traj, &pc, &params)?;
        println!(
            "T = {t:>5}: lhs = {:.3e}, main rhs = {:.3e}, neighborhood = {:.3e} -> {:?}",
            report.trajectory_lhs, rhs.main, rhs.neighborhood, report.verdict
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
