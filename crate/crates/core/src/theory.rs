//! Closed-form quantities from the convergence and lower-bound analyses.
//!
//! Everything here is a pure function of its arguments and evaluated in
//! `f64`. Constants `C₁ … C₁₃` are transcribed once, in
//! [`compute_constants`]; the test suite carries an independent second
//! transcription.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::landscapes::LowerBoundParams;
use crate::optimizers::{AdamParams, Trajectory};
use crate::probes;

/// `2√2 + 1`, the factor shared by both branches of the Adam bound.
const BOUND_FACTOR: f64 = 2.0 * SQRT_2 + 1.0;

/// Step used to locate the smallest `β₂` at which `g` is finite.
pub const GAMMA_SCAN_STEP: f64 = 1e-4;
/// Upper end of the `γ` bracket.
pub const GAMMA_UPPER: f64 = 1.0 - 1e-12;
/// Relative slack tolerated by the monotonicity scan of the `γ` equation.
pub const MONOTONE_TOL: f64 = 1e-12;
const MONOTONE_SCAN_POINTS: usize = 1000;

/// Problem-level constants of the smoothness and noise assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    pub n: usize,
    pub d: usize,
    /// `f(w₁,₀) - min f`.
    pub f_gap: f64,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.l0, self.l1, self.d0, self.d1, self.f_gap];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) || self.n == 0 || self.d == 0 {
            return Err(LabError::InvalidParams(format!(
                "problem constants must be finite and nonnegative with n, d ≥ 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// `(L₀, L₁)` pair under which the averaged objective is smooth.
    pub fn composite_smoothness(&self) -> (f64, f64) {
        let n = self.n as f64;
        (
            n * self.l0 + self.l1 * n.sqrt() * self.d0.sqrt(),
            self.l1 * n.sqrt() * self.d1.sqrt(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub g_value: f64,
    /// `β₂` threshold; absent when `D₁ = 0` or the root search fails.
    pub gamma: Option<f64>,
    pub smooth_l0: f64,
    pub smooth_l1: f64,
}

impl TheoryConstants {
    pub fn as_array(&self) -> [f64; 13] {
        [
            self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7, self.c8, self.c9,
            self.c10, self.c11, self.c12, self.c13,
        ]
    }
}

fn check_beta2(beta2: f64) -> Result<()> {
    if beta2 > 0.0 && beta2 < 1.0 {
        Ok(())
    } else {
        Err(LabError::Domain(format!("beta2 must lie in (0, 1), got {beta2}")))
    }
}

fn check_betas(beta1: f64, beta2: f64) -> Result<()> {
    check_beta2(beta2)?;
    if !(0.0..1.0).contains(&beta1) {
        return Err(LabError::Domain(format!("beta1 must lie in [0, 1), got {beta1}")));
    }
    if beta1 * beta1 >= beta2 {
        return Err(LabError::Domain(format!(
            "need beta1² < beta2, got beta1² = {} and beta2 = {beta2}",
            beta1 * beta1
        )));
    }
    Ok(())
}

/// Within-epoch drift factor of the adaptor. `+∞` where the last term's
/// radicand is nonpositive, i.e. `2n(1-β₂)/β₂ⁿ ≥ 1`.
pub fn g_of_beta2(beta2: f64, n: usize) -> Result<f64> {
    check_beta2(beta2)?;
    g_core(beta2.ln(), 1.0 - beta2, n)
}

/// [`g_of_beta2`] at `β₂ = 1 - gap`, accurate when `gap` is tiny.
pub fn g_of_gap(gap: f64, n: usize) -> Result<f64> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(LabError::Domain(format!("1 - beta2 must lie in (0, 1), got {gap}")));
    }
    g_core((-gap).ln_1p(), gap, n)
}

/// `g` from `ln β₂` and `1 - β₂`, written to avoid cancellation near `β₂ = 1`.
fn g_core(ln_b: f64, one_minus_b: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    let one_minus_pow_nm1 = -((nf - 1.0) * ln_b).exp_m1();
    let pow_n = (nf * ln_b).exp();

    // 1/√(β₂ⁿ⁻¹) - 1
    let t1 = (-(nf - 1.0) / 2.0 * ln_b).exp_m1();
    // 1 - 1/√(β₂ⁿ⁻¹ + 8n(1-β₂ⁿ⁻¹)/β₂ⁿ)
    let t2 = -(-0.5 * (one_minus_pow_nm1 * (8.0 * nf / pow_n - 1.0)).ln_1p()).exp_m1();
    // 1 - √β₂
    let t3 = -(0.5 * ln_b).exp_m1();
    // √(β₂/(1 - 2n(1-β₂)/β₂ⁿ)) - 1
    let shrink = one_minus_b * 2.0 * nf / pow_n;
    let t4 = if shrink < 1.0 {
        (0.5 * (ln_b - (-shrink).ln_1p())).exp_m1()
    } else {
        f64::INFINITY
    };
    Ok(t1.max(t2).max(t3).max(t4))
}

pub fn c1(beta1: f64, beta2: f64) -> f64 {
    (1.0 - beta1).powi(2) / (1.0 - beta2) / (1.0 - beta1 * beta1 / beta2) + 1.0
}

pub fn c2(beta1: f64, beta2: f64, n: usize) -> f64 {
    let c1 = c1(beta1, beta2);
    n as f64 * c1 + beta1 / (1.0 - beta1) * c1 * (1.0 + SQRT_2)
}

/// Evaluates `C₁ … C₁₃`, `g(β₂)` and `γ(D₁)`.
pub fn compute_constants(
    beta1: f64,
    beta2: f64,
    n: usize,
    d: usize,
    eta1: f64,
    pc: &ProblemConstants,
) -> Result<TheoryConstants> {
    check_betas(beta1, beta2)?;
    pc.validate()?;
    if !(eta1 > 0.0 && eta1.is_finite()) {
        return Err(LabError::Domain(format!("eta1 must be positive, got {eta1}")));
    }
    let g = g_of_beta2(beta2, n)?;
    let nf = n as f64;
    let df = d as f64;
    let (l0, l1) = (pc.l0, pc.l1);
    let (sd0, sd1) = (pc.d0.sqrt(), pc.d1.sqrt());
    let sqrt_n = nf.sqrt();
    let sqrt_d = df.sqrt();
    let sb2 = beta2.sqrt();
    let b2n = beta2.powf(nf);
    let sqrt_b2n = b2n.sqrt();
    // n - 1 + (1+β₁)/(1-β₁)
    let mom = nf - 1.0 + (1.0 + beta1) / (1.0 - beta1);
    // √2 n / β₂^{n/2}
    let drift = SQRT_2 * nf / beta2.powf(nf / 2.0);
    let f_l0 = nf * l0 + l1 * sqrt_n * sd0;

    // C1
    let c1 = (1.0 - beta1).powi(2) / (1.0 - beta2) * (1.0 / (1.0 - beta1 * beta1 / beta2)) + 1.0;
    // C2
    let c2 = nf * c1 + beta1 / (1.0 - beta1) * c1 * (1.0 + SQRT_2);
    // C3
    let c3 = c1
        * (nf * (l0 + l1 * sd0)
            + 2.0 * SQRT_2 * (l0 + l1 * sd0) * (1.0 - beta2).sqrt() / (1.0 - sb2) * sb2
                / (1.0 - sb2)
            + 8.0 * (2.0 * nf).sqrt() * l0 / (1.0 - b2n));
    // C4
    let c4 = 4.0 * l1 * c1 * sd1 * (1.0 - beta2).sqrt() / (1.0 - sb2);
    // C5
    let c5 = nf * nf
        * (1.0 + nf * sqrt_d * c1 * eta1 * l1 * sqrt_n * sd1)
        * (c4 + df * c4 * sd1 / (1.0 - sqrt_b2n));
    // C6
    let c6 = (df * c3 + c4 * nf * sd1 / (1.0 - sqrt_b2n)) * eta1 * eta1;
    // C7
    let c7 = 3.0 * nf * (c4 + df * c4 / (1.0 - sqrt_b2n)) * f_l0 * nf * nf * sqrt_d * c1
        * eta1.powi(3)
        + (df * c3 + c2 * c4 * nf * sd1 / (1.0 - sqrt_b2n)) * eta1 * eta1;
    // C8
    let c8 = (2.0 * nf * nf / b2n).sqrt() * l1 * sd1 * nf * sqrt_n
        + df * g * mom * drift * l1 * c1 * sd1 * (1.0 + 1.0 / (1.0 - b2n))
            * (nf + nf.powf(2.5) * sqrt_d * c1 * eta1 * l1 * sd1)
        + 2.0 * beta1 / ((1.0 - beta1) * eta1) * sqrt_d * c1;
    // C9
    let c9 = (2.0 * nf * nf / b2n).sqrt() * df * (nf * nf * l0 + nf * sqrt_n * l1 * sd0) * c1
        * eta1
        * eta1
        + g * mom * drift * (nf + 2.0 * SQRT_2 * beta1 / (1.0 - beta1)) * c1 * (l0 + l1 * sd0)
            * df
            * sqrt_d
            * eta1
            * eta1;
    // C10
    let c10 = 3.0 * df * g * mom * drift * l1 * c1 * sd1 * (1.0 + 1.0 / (1.0 - b2n)) * nf * f_l0
        * nf
        * sqrt_d
        * c1
        * eta1.powi(3)
        + c9;
    // C11
    let c11 = (0.5 + c2) * c5 + c8 + 3.0 * l1 * sqrt_n * sd1 * c2 * c2 * df / 2.0;
    // C12
    let c12 = (0.5 + c2) * c6 + c9 + f_l0 / 2.0 * 3.0 * c2 * c2 * df * eta1 * eta1;
    // C13
    let c13 = (0.5 + c2) * c7 + c10 + f_l0 / 2.0 * 3.0 * c2 * c2 * df * eta1 * eta1;

    let gamma = if pc.d1 > 0.0 {
        gamma_threshold(pc.d1, n, d, beta1).ok()
    } else {
        None
    };
    let (smooth_l0, smooth_l1) = pc.composite_smoothness();
    Ok(TheoryConstants {
        c1,
        c2,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c10,
        c11,
        c12,
        c13,
        g_value: g,
        gamma,
        smooth_l0,
        smooth_l1,
    })
}

/// Left side of the `γ` equation, `√d g(x) n / x^{n/2}`.
pub fn gamma_lhs(x: f64, n: usize, d: usize) -> Result<f64> {
    let g = g_of_beta2(x, n)?;
    Ok((d as f64).sqrt() * g * n as f64 / x.powf(n as f64 / 2.0))
}

/// [`gamma_lhs`] at `x = 1 - gap`.
pub fn gamma_lhs_gap(gap: f64, n: usize, d: usize) -> Result<f64> {
    let g = g_of_gap(gap, n)?;
    Ok((d as f64).sqrt() * g * n as f64 / (n as f64 / 2.0 * (-gap).ln_1p()).exp())
}

/// Right side of the `γ` equation.
pub fn gamma_rhs(d1: f64, n: usize, beta1: f64) -> f64 {
    let mom = n as f64 - 1.0 + (1.0 + beta1) / (1.0 - beta1);
    1.0 / (2.0 * (4.0 + SQRT_2) * d1.sqrt() * mom)
}

/// Smallest grid point (spacing [`GAMMA_SCAN_STEP`]) with finite `g`.
pub fn gamma_lower_end(n: usize) -> Result<f64> {
    let steps = (1.0 / GAMMA_SCAN_STEP).round() as usize;
    for s in 1..steps {
        let x = s as f64 * GAMMA_SCAN_STEP;
        if g_of_beta2(x, n)?.is_finite() {
            return Ok(x);
        }
    }
    Err(LabError::Domain(format!("g is infinite on the whole scan for n = {n}")))
}

/// The `β₂` threshold `γ(D₁)` above which the Adam bound applies.
pub fn gamma_threshold(d1: f64, n: usize, d: usize, beta1: f64) -> Result<f64> {
    Ok(1.0 - gamma_threshold_gap(d1, n, d, beta1)?)
}

/// `1 - γ(D₁)`, resolved to full relative precision even when `γ` lies
/// within a few ulps of 1.
///
/// Bisection to machine resolution in the gap on `[x_lo - step, 1 - 1e-12]`,
/// where `x_lo` is the first scan point with finite `g` (the left side is
/// treated as `+∞` below it). The left side is checked to be nonincreasing
/// on `[x_lo, 1 - 1e-12]` first.
pub fn gamma_threshold_gap(d1: f64, n: usize, d: usize, beta1: f64) -> Result<f64> {
    if !(d1 > 0.0 && d1.is_finite()) {
        return Err(LabError::Domain(format!("D1 must be positive, got {d1}")));
    }
    if !(0.0..1.0).contains(&beta1) {
        return Err(LabError::Domain(format!("beta1 must lie in [0, 1), got {beta1}")));
    }
    if d == 0 {
        return Err(LabError::Domain("d must be at least 1".into()));
    }
    let rhs = gamma_rhs(d1, n, beta1);
    let x_lo = gamma_lower_end(n)?;

    let lhs_hi = gamma_lhs(GAMMA_UPPER, n, d)?;
    if lhs_hi > rhs {
        return Err(LabError::NoRoot { lhs: lhs_hi, rhs });
    }

    let mut prev = gamma_lhs(x_lo, n, d)?;
    for i in 1..=MONOTONE_SCAN_POINTS {
        let x = x_lo + (GAMMA_UPPER - x_lo) * i as f64 / MONOTONE_SCAN_POINTS as f64;
        let cur = gamma_lhs(x, n, d)?;
        if cur > prev * (1.0 + MONOTONE_TOL) + f64::MIN_POSITIVE {
            return Err(LabError::NonMonotone {
                at: x,
                increase: cur - prev,
            });
        }
        prev = cur;
    }

    gamma_gap_root(rhs, 1.0 - x_lo + GAMMA_SCAN_STEP, n, d)
}

/// Bisection in `gap = 1 - x` on `[1 - GAMMA_UPPER, gap_hi]`.
fn gamma_gap_root(rhs: f64, gap_hi: f64, n: usize, d: usize) -> Result<f64> {
    // residual > 0 means the left side is still above the target
    let residual = |gap: f64| -> Result<f64> {
        let v = gamma_lhs_gap(gap, n, d)?;
        Ok(if v.is_finite() { v - rhs } else { f64::INFINITY })
    };
    // the left side grows with the gap
    let mut lo = 1.0 - GAMMA_UPPER;
    let mut hi = gap_hi.min(1.0 - f64::EPSILON);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r_lo = residual(lo)?.abs();
    let r_hi = residual(hi)?.abs();
    Ok(if r_lo < r_hi { lo } else { hi })
}

/// Margins of the two step-size requirements of the Adam analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta1Feasibility {
    /// `1/L₁ - 2 C₂ √d η₁`.
    pub step_margin: f64,
    /// `1/(4(2√2+1)) - √D₁ C₁₁ η₁`.
    pub second_order_margin: f64,
    pub feasible: bool,
}

pub fn eta1_feasible(tc: &TheoryConstants, eta1: f64, d: usize, l1: f64, d1: f64) -> Eta1Feasibility {
    let lhs1 = 2.0 * tc.c2 * (d as f64).sqrt() * eta1;
    let rhs1 = if l1 > 0.0 { 1.0 / l1 } else { f64::INFINITY };
    let lhs2 = d1.sqrt() * tc.c11 * eta1;
    let rhs2 = 1.0 / (4.0 * BOUND_FACTOR);
    let holds = |lhs: f64, rhs: f64| lhs <= rhs || (lhs - rhs) <= 1e-12 * rhs.abs();
    Eta1Feasibility {
        step_margin: rhs1 - lhs1,
        second_order_margin: rhs2 - lhs2,
        feasible: holds(lhs1, rhs1) && holds(lhs2, rhs2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Rhs {
    pub main: f64,
    pub neighborhood: f64,
}

/// Right-hand sides of both branches of the Adam bound at horizon `T`.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_rhs(
    horizon: u64,
    tc: &TheoryConstants,
    pc: &ProblemConstants,
    eta1: f64,
    xi: f64,
    beta1: f64,
    beta2: f64,
) -> Result<Theorem1Rhs> {
    if horizon == 0 {
        return Err(LabError::Domain("horizon must be at least 1".into()));
    }
    if !(pc.d1 > 0.0) {
        return Err(LabError::Domain("the main branch needs D1 > 0".into()));
    }
    let t = horizon as f64;
    let root_t = t.sqrt();
    let noise = (pc.d0.sqrt() + xi) / (4.0 * pc.d1.sqrt());
    let main = 4.0 * BOUND_FACTOR * pc.f_gap / (eta1 * root_t)
        + 4.0 * BOUND_FACTOR * (tc.c12 + noise * tc.c11 * eta1 * eta1) * t.ln() / (eta1 * root_t)
        + 4.0 * BOUND_FACTOR * (tc.c13 + noise * tc.c11) / (eta1 * root_t);

    let nf = pc.n as f64;
    let g = g_of_beta2(beta2, pc.n)?;
    let neighborhood = if pc.d0 == 0.0 {
        0.0
    } else {
        2.0 * (pc.d as f64).sqrt()
            * BOUND_FACTOR
            * pc.d0.sqrt()
            * g
            * (nf - 1.0 + (1.0 + beta1) / (1.0 - beta1))
            * (2.0 * nf / beta2.powf(nf)).sqrt()
    };
    Ok(Theorem1Rhs { main, neighborhood })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundVerdict {
    MainBranchHolds,
    NeighborhoodBranchHolds,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub main_rhs: f64,
    pub neighborhood_rhs: f64,
    /// Progress metric over the recorded epochs.
    pub trajectory_lhs: f64,
    pub min_grad_norm: f64,
    pub epochs: usize,
    pub verdict: BoundVerdict,
}

/// Evaluates the either/or Adam bound on a recorded RR-Adam trajectory.
pub fn check_theorem1(
    traj: &Trajectory,
    pc: &ProblemConstants,
    params: &AdamParams,
) -> Result<BoundReport> {
    let epochs = traj.snapshots().len();
    if epochs == 0 {
        return Err(LabError::MissingSnapshots);
    }
    let tc = compute_constants(params.beta1, params.beta2, pc.n, pc.d, params.eta1, pc)?;
    let rhs = theorem1_rhs(
        epochs as u64,
        &tc,
        pc,
        params.eta1,
        params.xi,
        params.beta1,
        params.beta2,
    )?;
    let lhs = probes::progress_metric(traj, pc.d0, pc.d1, params.xi)?;
    let min_grad_norm = traj
        .snapshots()
        .iter()
        .map(|s| s.grad_norm)
        .fold(f64::INFINITY, f64::min);
    let within = |v: f64, bound: f64| v <= bound || v - bound <= 1e-9 * bound.abs();
    let verdict = if within(lhs, rhs.main) {
        BoundVerdict::MainBranchHolds
    } else if within(min_grad_norm, rhs.neighborhood) {
        BoundVerdict::NeighborhoodBranchHolds
    } else {
        BoundVerdict::Violated
    };
    Ok(BoundReport {
        main_rhs: rhs.main,
        neighborhood_rhs: rhs.neighborhood,
        trajectory_lhs: lhs,
        min_grad_norm,
        epochs,
        verdict,
    })
}

/// Parameters of the worst-case GD construction on the lower-bound landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Construction {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    pub horizon: u64,
    #[serde(rename = "M")]
    pub m: f64,
    pub f_bar: f64,
    pub epsilon: f64,
    pub x0: f64,
    pub y0: f64,
    /// GD with `η₁ ≥ eta_star` grows `|x|` by at least `√2` per step.
    pub eta_star: f64,
    /// Below `eta_star`, `‖∇f(w_k)‖ ≥ ε` for every `k < slow_horizon`.
    pub slow_horizon: u64,
    /// `2(e^{ln2/(√2-1) - 1} - ¼) L₀/L₁`.
    pub m_lower_bound: f64,
    pub f_bar_over_epsilon: f64,
    pub constraints_ok: bool,
    /// `f(w₀) - min f` at the returned start point.
    pub start_gap: f64,
}

impl Thm2Construction {
    /// `2(f₁(x₀) - min f₁)`, the gap the construction assigns to `w₀`.
    pub fn natural_f_bar(l0: f64, l1: f64, m: f64) -> f64 {
        m / l1 - l0 / (2.0 * l1 * l1)
    }
}

/// `ln(L₁M/(2L₀) + ¼) + 1`.
fn log_term(l0: f64, l1: f64, m: f64) -> f64 {
    (l1 * m / (2.0 * l0) + 0.25).ln() + 1.0
}

pub fn theorem2_construction(
    l0: f64,
    l1: f64,
    horizon: u64,
    m: f64,
    f_bar: f64,
) -> Result<Thm2Construction> {
    if !(l0 > 0.0 && l1 > 0.0 && m > 0.0 && f_bar > 0.0 && horizon > 0)
        || ![l0, l1, m, f_bar].iter().all(|v| v.is_finite())
    {
        return Err(LabError::InvalidParams(format!(
            "construction needs positive finite L0, L1, T, M, f_bar (got {l0}, {l1}, {horizon}, {m}, {f_bar})"
        )));
    }
    let t = horizon as f64;
    let lt = log_term(l0, l1, m);
    let ratio = (l1 * m / 2.0 + l0 / 4.0) / (2.0 * (1.0 + SQRT_2) * lt);
    let epsilon = (ratio * f_bar / (4.0 * t.sqrt())).sqrt();

    let m_lower_bound = 2.0 * ((LN_2 / (SQRT_2 - 1.0) - 1.0).exp() - 0.25) * l0 / l1;
    let m_needed = m_lower_bound.max(epsilon);
    if !(m > m_needed) {
        return Err(LabError::ConstraintViolation {
            constraint: "M-lower-bound",
            lhs: m,
            rhs: m_needed,
        });
    }
    let f_bar_over_epsilon = f_bar / epsilon;
    if !(f_bar_over_epsilon > 6.0) {
        return Err(LabError::ConstraintViolation {
            constraint: "f_bar-over-epsilon",
            lhs: f_bar_over_epsilon,
            rhs: 6.0,
        });
    }

    let shape = LowerBoundParams::new(l0, l1, epsilon)?;
    let x0 = lt / l1;
    let f1_gap = shape.f1(x0) - shape.min_f1();
    // on the ramp f₂(y) = εy - ε/2, so f₂(y₀) - min f₂ = f₁ gap - ε
    let y0 = f1_gap / epsilon - 0.5;
    let f2_gap = shape.f2(y0);

    let ax0 = x0.abs();
    let log_eta_star = l1.ln() + (1.0 + SQRT_2).ln() + ax0.ln() - l0.ln() - (l1 * ax0 - 1.0);
    let eta_star = log_eta_star.exp();

    let slow = ratio * ratio * (f2_gap / epsilon - 1.5).powi(2) / (epsilon * epsilon);
    let slow_horizon = if slow.is_finite() && slow > 0.0 {
        slow.floor() as u64
    } else {
        0
    };

    Ok(Thm2Construction {
        l0,
        l1,
        horizon,
        m,
        f_bar,
        epsilon,
        x0,
        y0,
        eta_star,
        slow_horizon,
        m_lower_bound,
        f_bar_over_epsilon,
        constraints_ok: true,
        start_gap: f1_gap + f2_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g_vanishes_near_one() {
        assert!(g_of_beta2(1.0 - 1e-9, 10).unwrap() < 1e-6);
    }

    #[test]
    fn g_is_infinite_when_radicand_fails() {
        let radicand_factor = 20.0 * 0.1 / 0.9f64.powi(10);
        assert!(radicand_factor > 1.0);
        assert!(g_of_beta2(0.9, 10).unwrap().is_infinite());
    }

    #[test]
    fn g_decreases_toward_one() {
        assert!(g_of_beta2(0.9999, 10).unwrap() < g_of_beta2(0.999, 10).unwrap());
    }

    #[test]
    fn g_rejects_bad_domain() {
        assert!(g_of_beta2(1.0, 3).is_err());
        assert!(g_of_beta2(0.0, 3).is_err());
    }

    #[test]
    fn c1_examples() {
        let pc = ProblemConstants { l0: 1.0, l1: 1.0, d0: 1.0, d1: 1.0, n: 4, d: 1, f_gap: 1.0 };
        let tc = compute_constants(0.0, 0.999, 4, 1, 0.01, &pc).unwrap();
        assert_relative_eq!(tc.c1, 1001.0, max_relative = 1e-12);
        assert_relative_eq!(tc.c2, 4.0 * tc.c1, max_relative = 1e-15);
        let tc = compute_constants(0.9, 0.999, 4, 1, 0.01, &pc).unwrap();
        let expected = (0.01 / 0.001) * 1.0 / (1.0 - 0.81 / 0.999) + 1.0;
        assert_relative_eq!(tc.c1, expected, max_relative = 1e-12);
        assert!(compute_constants(0.9, 0.81, 4, 1, 0.01, &pc).is_err());
    }

    #[test]
    fn gamma_examples() {
        let g1 = gamma_threshold(1.0, 2, 1, 0.0).unwrap();
        let g_small = gamma_threshold(1e-8, 2, 1, 0.0).unwrap();
        assert!(g_small < g1);
        assert!(g1 > 0.0 && g1 < 1.0);
        let rhs = gamma_rhs(1.0, 2, 0.0);
        let lhs = gamma_lhs(g1, 2, 1).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn gamma_rejects_nonpositive_d1() {
        assert!(gamma_threshold(0.0, 2, 1, 0.0).is_err());
    }

    #[test]
    fn feasibility_examples() {
        let pc = ProblemConstants { l0: 1.0, l1: 2.0, d0: 1.0, d1: 1.0, n: 3, d: 2, f_gap: 1.0 };
        let tc = compute_constants(0.5, 0.99, 3, 2, 1e-3, &pc).unwrap();
        let tiny = eta1_feasible(&tc, 1e-30, 2, 2.0, 1.0);
        assert!(tiny.feasible);
        let huge = eta1_feasible(&tc, 1e6, 2, 2.0, 1.0);
        assert!(!huge.feasible && huge.step_margin < 0.0 && huge.second_order_margin < 0.0);
        let edge = 1.0 / (2.0 * tc.c2 * 2f64.sqrt() * 2.0);
        let at_edge = eta1_feasible(&tc, edge, 2, 2.0, 1.0);
        assert!(at_edge.step_margin.abs() < 1e-15);
    }

    #[test]
    fn theorem1_rhs_examples() {
        let pc = ProblemConstants { l0: 1.0, l1: 0.5, d0: 0.0, d1: 1.0, n: 2, d: 1, f_gap: 3.0 };
        let tc = compute_constants(0.0, 0.999, 2, 1, 0.01, &pc).unwrap();
        let r = theorem1_rhs(100, &tc, &pc, 0.01, 1e-8, 0.0, 0.999).unwrap();
        assert_eq!(r.neighborhood, 0.0);
        let r_long = theorem1_rhs(10_000, &tc, &pc, 0.01, 1e-8, 0.0, 0.999).unwrap();
        assert!(r_long.main < r.main);

        let pc = ProblemConstants { d0: 1.0, ..pc };
        let near = |b2: f64| {
            let tc = compute_constants(0.0, b2, 2, 1, 0.01, &pc).unwrap();
            theorem1_rhs(100, &tc, &pc, 0.01, 0.0, 0.0, b2).unwrap().neighborhood
        };
        assert!(near(1.0 - 1e-9) < 1e-6);
        assert!(near(0.9999) < near(0.999));
    }

    #[test]
    fn construction_examples() {
        let c = theorem2_construction(1.0, 1.0, 10_000, 100.0, 99.5).unwrap();
        assert_relative_eq!(c.x0, 50.25f64.ln() + 1.0, max_relative = 1e-15);
        let expected_eta = (1.0 + SQRT_2) * c.x0 / (c.x0 - 1.0).exp();
        assert_relative_eq!(c.eta_star, expected_eta, max_relative = 1e-13);
        // same threshold written through the epsilon ratio
        let ratio = 50.25 / (2.0 * (1.0 + SQRT_2) * c.x0);
        assert_relative_eq!(c.eta_star, 1.0 / (2.0 * ratio), max_relative = 1e-13);

        let c4 = theorem2_construction(1.0, 1.0, 10_000, 100.0, 4.0 * 99.5).unwrap();
        assert_relative_eq!(c4.epsilon, 2.0 * c.epsilon, max_relative = 1e-14);
    }

    #[test]
    fn construction_constraints() {
        match theorem2_construction(1.0, 1.0, 10_000, 100.0, 1e-3) {
            Err(LabError::ConstraintViolation { constraint, rhs, .. }) => {
                assert_eq!(constraint, "f_bar-over-epsilon");
                assert_eq!(rhs, 6.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(theorem2_construction(-1.0, 1.0, 10, 100.0, 1.0).is_err());
    }
}
