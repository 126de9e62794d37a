// Bounded-update and u-gap checks on a single RR-Adam run.

use rr_adam_lab::optimizers::aux_sequence;
use rr_adam_lab::probes::{check_bounded_update, check_u_gap};
use rr_adam_lab::theory::{compute_constants, ProblemConstants};
use rr_adam_lab::{adam_run, AdamParams, FiniteSumObjective};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let obj = FiniteSumObjective::zhang_counterexample();
    let x0 = [-2.0];
    let (d0, d1) = obj.known_d0_d1().unwrap();
    let (l0, l1) = obj.known_l0_l1().unwrap();
    let pc = ProblemConstants {
        l0,
        l1,
        d0,
        d1,
        n: obj.n(),
        d: obj.d(),
        f_gap: obj.value(&x0)? - obj.known_min().unwrap(),
    };

    let params = AdamParams::new(0.5, 0.99, 0.1, 1e-8, 500, 3).with_lemma_checks();
    let traj = adam_run(&obj, &x0, &params)?;
    let tc = compute_constants(params.beta1, params.beta2, obj.n(), obj.d(), params.eta1, &pc)?;

    let update = check_bounded_update(&traj, &tc, &params)?;
    let gap = check_u_gap(&traj, &tc, &params)?;
    println!("C1 = {:.3}, largest |m|/(sqrt(nu)+xi) = {:.3}", tc.c1, update.max_observed);
    println!("C2 = {:.3}, largest u-gap / eta_k = {:.3}", tc.c2, gap.max_observed);
    let u = aux_sequence(&traj, params.beta1)?;
    println!("u_1 = {:?}, u_T+1 = {:?}", u[0], u[u.len() - 1]);
    assert!(update.holds() && gap.holds());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
