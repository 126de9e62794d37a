mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rr_adam_lab::landscapes::LowerBoundParams;
use rr_adam_lab::optimizers::rng::is_permutation;
use rr_adam_lab::probes::{check_bounded_update, check_u_gap, local_smoothness, upper_envelope};
use rr_adam_lab::theory::{
    compute_constants, g_of_beta2, g_of_gap, gamma_threshold, gamma_threshold_gap, ProblemConstants,
};
use rr_adam_lab::{adam_run, AdamParams, FiniteSumObjective};

use support::{central, f1_ref, f2_ref, g_ref, g_ref_gap, gamma_sides_gap, rel_err};

fn lb_params() -> impl Strategy<Value = LowerBoundParams> {
    (0.1f64..10.0, 0.1f64..10.0, 1e-3f64..5.0).prop_map(|(l0, l1, e)| LowerBoundParams::new(l0, l1, e).unwrap())
}

proptest! {
    #[test]
    fn lower_bound_pieces_are_c1_at_the_knots(p in lb_params()) {
        let k = 1.0 / p.l1;
        let h = 1e-9 * k.max(1.0);
        for x in [k, -k] {
            prop_assert!(rel_err(p.f1(x - h), p.f1(x + h)) < 1e-6);
            prop_assert!(rel_err(p.f1_prime(x - h), p.f1_prime(x + h)) < 1e-6);
            prop_assert!(rel_err(p.f1(x), f1_ref(&p, x)) < 1e-14);
        }
        for y in [1.0, -1.0] {
            prop_assert!((p.f2(y - 1e-9) - p.f2(y + 1e-9)).abs() < 1e-8 * p.epsilon.max(1.0));
            prop_assert!((p.f2_prime(y - 1e-12) - p.f2_prime(y + 1e-12)).abs() < 1e-9);
            prop_assert!(rel_err(p.f2(y), f2_ref(&p, y)) < 1e-14);
        }
    }

    #[test]
    fn scaling_leaves_adam_iterates_unchanged(
        c in 1e-3f64..1e3,
        beta1 in 0.0f64..0.95,
        beta2 in 0.9f64..0.9999,
        seed in 0u64..1000,
    ) {
        let base = FiniteSumObjective::zhang_counterexample();
        let scaled = FiniteSumObjective::zhang_counterexample_scaled(c).unwrap();
        let params = AdamParams::new(beta1, beta2, 0.1, 0.0, 40, seed);
        let a = adam_run(&base, &[-2.0], &params).unwrap();
        let b = adam_run(&scaled, &[-2.0], &params).unwrap();
        prop_assert_eq!(a.steps.len(), b.steps.len());
        for (x, y) in a.steps.iter().zip(&b.steps) {
            prop_assert_eq!(x.component, y.component);
            prop_assert!(rel_err(x.w[0], y.w[0]) <= 1e-9);
        }
    }

    #[test]
    fn permutations_are_valid_and_seeded(seed in any::<u64>(), stream in any::<u64>()) {
        let obj = FiniteSumObjective::zhang_counterexample();
        let params = AdamParams::new(0.5, 0.99, 0.05, 1e-8, 8, seed).with_stream(stream);
        let a = adam_run(&obj, &[1.0], &params).unwrap();
        let b = adam_run(&obj, &[1.0], &params).unwrap();
        for s in a.snapshots() {
            prop_assert_eq!(s.permutation.len(), 10);
            prop_assert!(is_permutation(&s.permutation));
        }
        prop_assert_eq!(a, b);
    }

    #[test]
    fn envelope_matches_exhaustive_search(
        pts in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 2..25),
    ) {
        prop_assume!(pts.iter().any(|p| p.0 != pts[0].0));
        let env = upper_envelope(&pts).unwrap();
        prop_assert!(env.intercept >= 0.0 && env.slope >= 0.0);
        for &(u, v) in &pts {
            prop_assert!(v <= env.slope * u + env.intercept + 1e-9 * (1.0 + v.abs()));
        }
        let (best_cost, _) = brute_force_envelope(&pts);
        let med = median_u(&pts);
        let cost = env.intercept + env.slope * med;
        prop_assert!(rel_err(cost, best_cost) <= 1e-9 || (cost - best_cost).abs() <= 1e-9);
    }

    #[test]
    fn smoothness_is_exact_on_quadratics(
        a in prop::collection::vec(0.01f64..50.0, 1..5),
        start in prop::collection::vec(-10.0f64..10.0, 5),
        len in 1e-4f64..10.0,
        axis in 0usize..5,
        m in 1usize..20,
    ) {
        let d = a.len();
        let axis = axis % d;
        let obj = FiniteSumObjective::quadratic_sum(vec![a.clone()], vec![vec![0.3; d]]).unwrap();
        let w_a: Vec<f64> = start[..d].to_vec();
        let mut w_b = w_a.clone();
        w_b[axis] += len;
        let est = local_smoothness(&obj, &w_a, &w_b, 1.0 / m as f64).unwrap();
        prop_assert!(rel_err(est.estimate, a[axis]) <= 1e-8);
    }

    #[test]
    fn lemmas_hold_for_random_momentum(
        beta1 in 0.0f64..0.95,
        beta2 in 0.9f64..0.9995,
        eta1 in 1e-3f64..0.5,
        seed in 0u64..10_000,
        x0 in -5.0f64..5.0,
    ) {
        prop_assume!(beta1 * beta1 < beta2);
        let obj = FiniteSumObjective::zhang_counterexample();
        let params = AdamParams::new(beta1, beta2, eta1, 1e-8, 30, seed).with_lemma_checks();
        let traj = adam_run(&obj, &[x0], &params).unwrap();
        let pc = ProblemConstants { l0: 2.0, l1: 0.0, d0: 1.0, d1: 1.0, n: 10, d: 1, f_gap: 1.0 };
        let tc = compute_constants(beta1, beta2, 10, 1, eta1, &pc).unwrap();
        let bu = check_bounded_update(&traj, &tc, &params).unwrap();
        let ug = check_u_gap(&traj, &tc, &params).unwrap();
        prop_assert!(bu.holds(), "{:?}", bu.violations.first());
        prop_assert!(ug.holds(), "{:?}", ug.violations.first());
        prop_assert_eq!(traj.bounded_update_violations, Some(0));
    }

    #[test]
    fn gamma_root_balances_both_sides(
        d1 in 0.01f64..1e4,
        n in 1usize..40,
        d in 1usize..20,
        beta1 in 0.0f64..0.99,
    ) {
        let gap = gamma_threshold_gap(d1, n, d, beta1).unwrap();
        prop_assert_eq!(gamma_threshold(d1, n, d, beta1).unwrap(), 1.0 - gap);
        let (lhs, rhs) = gamma_sides_gap(gap, d1, n, d, beta1);
        prop_assert!(rel_err(lhs, rhs) <= 1e-10, "lhs {} rhs {} at gap {}", lhs, rhs, gap);
    }

    #[test]
    fn g_agrees_between_parametrizations(gap in 1e-6f64..0.5, n in 1usize..50) {
        let direct = g_of_beta2(1.0 - gap, n).unwrap();
        let shifted = g_of_gap(gap, n).unwrap();
        prop_assert!(rel_err(direct, shifted) <= 1e-8);
        prop_assert!(rel_err(shifted, g_ref_gap(gap, n)) <= 1e-12);
        prop_assert!(rel_err(direct, g_ref(1.0 - gap, n)) <= 1e-6);
    }
}

fn median_u(pts: &[(f64, f64)]) -> f64 {
    let mut u: Vec<f64> = pts.iter().map(|p| p.0).collect();
    u.sort_by(f64::total_cmp);
    let m = u.len();
    if m % 2 == 1 {
        u[m / 2]
    } else {
        0.5 * (u[m / 2 - 1] + u[m / 2])
    }
}

/// Every line through two points, plus the two axis-anchored lines; keeps
/// the cheapest feasible one.
fn brute_force_envelope(pts: &[(f64, f64)]) -> (f64, (f64, f64)) {
    let med = median_u(pts);
    let mut cands = Vec::new();
    let vmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    cands.push((vmax, 0.0));
    let steep = pts
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|p| p.1 / p.0)
        .fold(0.0, f64::max);
    if pts.iter().all(|p| p.0 > 0.0 || p.1 <= 0.0) {
        cands.push((0.0, steep));
    }
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if p.0 != q.0 {
                let slope = (q.1 - p.1) / (q.0 - p.0);
                cands.push((p.1 - slope * p.0, slope));
            }
        }
    }
    let feasible = |&(b, s): &(f64, f64)| {
        b >= -1e-12 && s >= -1e-12 && pts.iter().all(|&(u, v)| v <= s * u + b + 1e-9 * (1.0 + v.abs()))
    };
    cands
        .into_iter()
        .filter(feasible)
        .map(|(b, s)| (b + s * med, (b, s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("horizontal line is always feasible")
}

#[test]
fn l0_l1_bound_holds_on_lower_bound_landscape() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let p = LowerBoundParams::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), 1.0).unwrap();
        let x: f64 = rng.gen_range(-20.0..20.0) / p.l1;
        let lhs = p.f1_second(x);
        let rhs = p.l0 + p.l1 * p.f1_prime(x).abs();
        assert!(lhs <= rhs * (1.0 + 1e-12), "x = {x}, {p:?}: {lhs} > {rhs}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let zhang = FiniteSumObjective::zhang_counterexample();
    let lb = FiniteSumObjective::lower_bound(LowerBoundParams::new(1.5, 0.7, 0.2).unwrap(), 3).unwrap();
    let quad = FiniteSumObjective::quadratic_sum(
        vec![vec![1.0, 3.0, -0.5], vec![2.0, 0.1, 4.0]],
        vec![vec![0.5, -1.0, 2.0], vec![-3.0, 0.0, 1.0]],
    )
    .unwrap();
    for obj in [&zhang, &lb, &quad] {
        for _ in 0..1000 {
            let w: Vec<f64> = (0..obj.d()).map(|_| rng.gen_range(-6.0..6.0)).collect();
            let j = rng.gen_range(0..obj.n());
            let g = obj.component_grad(j, &w).unwrap();
            for l in 0..obj.d() {
                let fd = central(
                    |t| {
                        let mut p = w.clone();
                        p[l] = t;
                        obj.component_value(j, &p).unwrap()
                    },
                    w[l],
                    1e-6,
                );
                let tol = 1e-5 * (1.0 + g[l].abs());
                assert!((fd - g[l]).abs() <= tol, "{:?} j={j} l={l} w={w:?}: {fd} vs {}", obj.kind(), g[l]);
            }
        }
    }
}
