//! Trajectory diagnostics: local smoothness along steps, envelope fits for
//! the noise and smoothness assumptions, and runtime checks of the Adam
//! lemmas.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::landscapes::FiniteSumObjective;
use crate::optimizers::{aux_sequence, AdamParams, EpochSnapshot, Method, Trajectory, LEMMA_REL_TOL};
use crate::theory::TheoryConstants;

/// Default finite-difference fraction (ten probe points per segment).
pub const DEFAULT_ALPHA: f64 = 0.1;
/// Segments shorter than this are not probed.
pub const DEGENERATE_SEGMENT: f64 = 1e-14;
/// Floor applied to both coordinates before a log-log fit.
pub const LOG_FIT_FLOOR: f64 = 1e-12;
const MAX_STORED_VIOLATIONS: usize = 100;

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    pub step: Option<u64>,
    pub estimate: f64,
    pub alpha: f64,
    pub segment_length: f64,
}

/// Number of grid points `m` for `alpha = 1/m`.
fn grid_points(alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(LabError::InvalidAlpha(alpha));
    }
    let m = (1.0 / alpha).round();
    if (m * alpha - 1.0).abs() > 1e-12 {
        return Err(LabError::InvalidAlpha(alpha));
    }
    Ok(m as usize)
}

/// `max_{γ ∈ {α, 2α, …, 1}} ‖∇f(w_a + γ(w_b - w_a)) - ∇f(w_a)‖ / (γ ‖w_b - w_a‖)`.
pub fn local_smoothness(
    obj: &FiniteSumObjective,
    w_a: &[f64],
    w_b: &[f64],
    alpha: f64,
) -> Result<SmoothnessEstimate> {
    let m = grid_points(alpha)?;
    if w_a.len() != w_b.len() {
        return Err(LabError::DimensionMismatch {
            expected: w_a.len(),
            got: w_b.len(),
        });
    }
    let dir: Vec<f64> = w_b.iter().zip(w_a).map(|(b, a)| b - a).collect();
    let len = l2(&dir);
    if !(len >= DEGENERATE_SEGMENT) {
        return Err(LabError::DegenerateSegment(len));
    }
    let g_a = obj.full_grad(w_a)?;
    let mut best = 0.0_f64;
    for s in 1..=m {
        let gamma = if s == m { 1.0 } else { s as f64 / m as f64 };
        let p: Vec<f64> = w_a.iter().zip(&dir).map(|(a, d)| a + gamma * d).collect();
        let g = obj.full_grad(&p)?;
        let diff: Vec<f64> = g.iter().zip(&g_a).map(|(x, y)| x - y).collect();
        best = best.max(l2(&diff) / (gamma * len));
    }
    Ok(SmoothnessEstimate {
        step: None,
        estimate: best,
        alpha,
        segment_length: len,
    })
}

/// Per-step probe result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub step: u64,
    /// `‖∇f(w_k)‖` at the segment start.
    pub grad_norm: f64,
    pub smoothness: Option<SmoothnessEstimate>,
}

/// Probes every `stride`-th step of a trajectory along `w_k → w_{k+1}`.
/// The returned vector has one entry per step; skipped or degenerate steps
/// carry `None`.
pub fn probe_trajectory(
    obj: &FiniteSumObjective,
    traj: &Trajectory,
    alpha: f64,
    stride: usize,
) -> Result<Vec<Option<ProbePoint>>> {
    grid_points(alpha)?;
    let stride = stride.max(1);
    let iterates = traj.iterates();
    let mut out = Vec::with_capacity(traj.steps.len());
    for (idx, pair) in iterates.windows(2).enumerate() {
        if idx % stride != 0 || pair[1].iter().any(|v| !v.is_finite()) {
            out.push(None);
            continue;
        }
        let grad_norm = l2(&obj.full_grad(pair[0])?);
        let smoothness = match local_smoothness(obj, pair[0], pair[1], alpha) {
            Ok(mut est) => {
                est.step = Some(idx as u64 + 1);
                Some(est)
            }
            Err(LabError::DegenerateSegment(_)) => None,
            Err(e) => return Err(e),
        };
        out.push(Some(ProbePoint {
            step: idx as u64 + 1,
            grad_norm,
            smoothness,
        }));
    }
    Ok(out)
}

/// Line `v ≤ slope·u + intercept` with nonnegative coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub intercept: f64,
    pub slope: f64,
    /// `max_j (v_j - slope·u_j - intercept)`; `≤ 0` for a valid envelope.
    pub max_violation: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull of points sorted by `(u, v)`, left to right.
fn upper_hull(sorted: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in sorted {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Tightest nonnegative affine upper envelope of `(u, v)` points.
///
/// Among feasible lines `v ≤ D₁u + D₀` with `D₀, D₁ ≥ 0`, returns the one
/// minimizing `D₀ + D₁·median(u)` (ties go to the smaller slope). The
/// optimum sits on a vertex of the feasible region: a line through two
/// upper-hull points, the horizontal line through the highest point, or the
/// line through the origin with the steepest `v/u`. Upper-hull edges are
/// exactly the feasible two-point lines, so the search is `O(m log m)`.
pub fn upper_envelope(points: &[(f64, f64)]) -> Result<Envelope> {
    if points.is_empty() {
        return Err(LabError::InsufficientSamples("no points".into()));
    }
    if points.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
        return Err(LabError::NonFinite("envelope sample".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut us: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    us.sort_by(f64::total_cmp);
    let med = median(&us);

    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let v_max = sorted.iter().fold(f64::MIN, |m, p| m.max(p.1));
    candidates.push((v_max.max(0.0), 0.0));
    if sorted.iter().all(|&(u, v)| u > 0.0 || v <= 0.0) {
        let slope = sorted
            .iter()
            .filter(|p| p.0 > 0.0)
            .fold(0.0_f64, |m, p| m.max(p.1 / p.0));
        candidates.push((0.0, slope));
    }
    let hull = upper_hull(&sorted);
    for e in hull.windows(2) {
        let ((u1, v1), (u2, v2)) = (e[0], e[1]);
        if u2 > u1 {
            let slope = (v2 - v1) / (u2 - u1);
            let intercept = v1 - slope * u1;
            if slope >= 0.0 && intercept >= 0.0 {
                candidates.push((intercept, slope));
            }
        }
    }

    let violation = |(b, s): (f64, f64)| {
        sorted
            .iter()
            .fold(f64::MIN, |m, &(u, v)| m.max(v - (s * u + b)))
    };
    let scale = sorted.iter().fold(1.0_f64, |m, p| m.max(p.1.abs()));
    let (mut intercept, slope) = candidates
        .into_iter()
        .filter(|&c| violation(c) <= 1e-9 * scale)
        .min_by(|a, b| {
            (a.0 + a.1 * med)
                .total_cmp(&(b.0 + b.1 * med))
                .then(a.1.total_cmp(&b.1))
        })
        .expect("the horizontal candidate is always feasible");
    let mut max_violation = violation((intercept, slope));
    if max_violation > 0.0 {
        // absorb rounding in the two-point line
        intercept += max_violation;
        max_violation = violation((intercept, slope));
    }
    Ok(Envelope {
        intercept,
        slope,
        max_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineNoiseFit {
    #[serde(rename = "D0_hat")]
    pub d0_hat: f64,
    #[serde(rename = "D1_hat")]
    pub d1_hat: f64,
    pub max_violation: f64,
    pub sample_count: usize,
}

/// `(‖∇f(w)‖², (1/n) Σ_i ‖∇f_i(w)‖²)` at `w`.
pub fn noise_pair(obj: &FiniteSumObjective, w: &[f64]) -> Result<(f64, f64)> {
    let g = obj.full_grad(w)?;
    let u = g.iter().map(|x| x * x).sum();
    let mut v = 0.0;
    for j in 0..obj.n() {
        v += obj.component_grad(j, w)?.iter().map(|x| x * x).sum::<f64>();
    }
    Ok((u, v / obj.n() as f64))
}

/// Fits `(1/n) Σ_i ‖∇f_i(w)‖² ≤ D₁‖∇f(w)‖² + D₀` over the samples.
pub fn affine_noise_fit(obj: &FiniteSumObjective, samples: &[Vec<f64>]) -> Result<AffineNoiseFit> {
    let pairs = samples
        .iter()
        .map(|w| noise_pair(obj, w))
        .collect::<Result<Vec<_>>>()?;
    let first = pairs.first().map(|p| p.0);
    if pairs.len() < 2 || pairs.iter().all(|p| Some(p.0) == first) {
        return Err(LabError::InsufficientSamples(
            "need at least two samples with distinct ‖∇f‖²".into(),
        ));
    }
    let env = upper_envelope(&pairs)?;
    Ok(AffineNoiseFit {
        d0_hat: env.intercept,
        d1_hat: env.slope,
        max_violation: env.max_violation,
        sample_count: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L0L1Fit {
    #[serde(rename = "L0_hat")]
    pub l0_hat: f64,
    #[serde(rename = "L1_hat")]
    pub l1_hat: f64,
    pub log_log_slope: f64,
    pub log_log_intercept: f64,
    pub r_squared: f64,
    /// Set when every admissible gradient norm is identical and the slope is undefined.
    pub flat_fit: bool,
    pub admissible: usize,
}

/// Least squares of `ln(smoothness)` on `ln(grad_norm)`, plus the
/// envelope `smoothness ≤ L0_hat + L1_hat·grad_norm`.
pub fn l0l1_fit(pairs: &[(f64, f64)]) -> Result<L0L1Fit> {
    let adm: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(g, s)| g > LOG_FIT_FLOOR && s > LOG_FIT_FLOOR && g.is_finite() && s.is_finite())
        .collect();
    if adm.len() < 3 {
        return Err(LabError::InsufficientSamples(format!(
            "need at least 3 admissible (grad, smoothness) pairs, got {}",
            adm.len()
        )));
    }
    let xs: Vec<f64> = adm.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = adm.iter().map(|p| p.1.ln()).collect();
    let m = adm.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();

    let flat_fit = sxx <= 0.0;
    let (slope, intercept, r_squared) = if flat_fit {
        (0.0, my, 0.0)
    } else {
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r2 = if syy > 0.0 {
            (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (slope, intercept, r2)
    };

    let env = upper_envelope(&adm)?;
    Ok(L0L1Fit {
        l0_hat: env.intercept,
        l1_hat: env.slope,
        log_log_slope: slope,
        log_log_intercept: intercept,
        r_squared,
        flat_fit,
        admissible: adm.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    BoundedUpdate,
    UGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub epoch: u64,
    pub index: usize,
    pub coordinate: usize,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub checks: u64,
    pub violation_count: u64,
    /// First violations in trajectory order.
    pub violations: Vec<LemmaViolation>,
    /// Largest `|m|/(√ν+ξ)` (bounded update) or largest gap divided by `η_k` (u-gap).
    pub max_observed: f64,
    /// `C₁` or `C₂`.
    pub bound: f64,
    /// Largest observed/bound ratio over every checked inequality.
    pub worst_fraction: f64,
}

impl LemmaReport {
    fn new(lemma: Lemma, bound: f64) -> Self {
        Self {
            lemma,
            checks: 0,
            violation_count: 0,
            violations: Vec::new(),
            max_observed: 0.0,
            bound,
            worst_fraction: 0.0,
        }
    }

    fn check(&mut self, epoch: u64, index: usize, coordinate: usize, observed: f64, bound: f64) {
        self.checks += 1;
        if bound > 0.0 {
            self.worst_fraction = self.worst_fraction.max(observed / bound);
        }
        if !(observed <= bound * (1.0 + LEMMA_REL_TOL)) {
            self.violation_count += 1;
            if self.violations.len() < MAX_STORED_VIOLATIONS {
                self.violations.push(LemmaViolation {
                    epoch,
                    index,
                    coordinate,
                    observed,
                    bound,
                });
            }
        }
    }

    pub fn holds(&self) -> bool {
        self.violation_count == 0
    }
}

fn lemma_preconditions(traj: &Trajectory, params: &AdamParams) -> Result<()> {
    if traj.method != Method::RrAdam {
        return Err(LabError::InvalidParams("lemma checks apply to RR-Adam trajectories".into()));
    }
    if params.beta1 * params.beta1 >= params.beta2 {
        return Err(LabError::Domain(format!(
            "lemmas need beta1² < beta2 (beta1 = {}, beta2 = {})",
            params.beta1, params.beta2
        )));
    }
    Ok(())
}

/// Checks `|m_l|/(√ν_l + ξ) ≤ C₁` and `|Δw_l| ≤ C₁ η_k` at every step and coordinate.
pub fn check_bounded_update(
    traj: &Trajectory,
    tc: &TheoryConstants,
    params: &AdamParams,
) -> Result<LemmaReport> {
    lemma_preconditions(traj, params)?;
    let c1 = tc.c1;
    let mut report = LemmaReport::new(Lemma::BoundedUpdate, c1);
    for s in &traj.steps {
        for l in 0..traj.d {
            let ratio = if s.m[l] == 0.0 {
                0.0
            } else {
                s.m[l].abs() / (s.nu[l].sqrt() + params.xi)
            };
            report.max_observed = report.max_observed.max(ratio);
            report.check(s.epoch, s.index, l, ratio, c1);
            report.check(s.epoch, s.index, l, s.update[l], c1 * s.step_size);
        }
    }
    Ok(report)
}

/// Checks `|u_{l,k} - w_{l,k,0}| ≤ C₂ η_k` and `|u_{l,k+1} - u_{l,k}| ≤ C₂ η_k` at every boundary.
pub fn check_u_gap(traj: &Trajectory, tc: &TheoryConstants, params: &AdamParams) -> Result<LemmaReport> {
    lemma_preconditions(traj, params)?;
    let c2 = tc.c2;
    let u = aux_sequence(traj, params.beta1)?;
    let boundaries: Vec<&EpochSnapshot> = traj.boundaries().collect();
    let mut report = LemmaReport::new(Lemma::UGap, c2);
    for (idx, b) in boundaries.iter().enumerate() {
        let eta = params.step_size(b.epoch);
        for l in 0..traj.d {
            let gap = (u[idx][l] - b.w_start[l]).abs();
            report.max_observed = report.max_observed.max(gap / eta);
            report.check(b.epoch, 0, l, gap, c2 * eta);
            if let Some(next) = u.get(idx + 1) {
                let jump = (next[l] - u[idx][l]).abs();
                report.max_observed = report.max_observed.max(jump / eta);
                report.check(b.epoch, 0, l, jump, c2 * eta);
            }
        }
    }
    Ok(report)
}

fn progress_over(snapshots: &[EpochSnapshot], d0: f64, d1: f64, xi: f64) -> Result<f64> {
    if snapshots.is_empty() {
        return Err(LabError::MissingSnapshots);
    }
    if !(d1 > 0.0) {
        return Err(LabError::Domain(format!("progress metric needs D1 > 0, got {d1}")));
    }
    let denom = d0.sqrt() + xi;
    Ok(snapshots
        .iter()
        .map(|s| {
            let g = s.grad_norm;
            let first = g / d1.sqrt();
            let second = if denom > 0.0 {
                g * g / denom
            } else if g == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            first.min(second)
        })
        .fold(f64::INFINITY, f64::min))
}

/// `min_k min{‖∇f(w_{k,0})‖/√D₁, ‖∇f(w_{k,0})‖²/(√D₀ + ξ)}` over the
/// recorded epochs. Pass `xi = 0` for the variant without `ξ`.
pub fn progress_metric(traj: &Trajectory, d0: f64, d1: f64, xi: f64) -> Result<f64> {
    progress_over(traj.snapshots(), d0, d1, xi)
}

/// [`progress_metric`] restricted to the first `epochs` epochs.
pub fn progress_metric_prefix(traj: &Trajectory, epochs: usize, d0: f64, d1: f64, xi: f64) -> Result<f64> {
    let end = epochs.min(traj.snapshots().len());
    progress_over(&traj.snapshots()[..end], d0, d1, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::LowerBoundParams;
    use crate::optimizers::{adam_run, gd_run};
    use crate::theory::{compute_constants, ProblemConstants};

    /// O(m³) reference: every pair line plus the two axis candidates.
    fn brute_envelope(points: &[(f64, f64)]) -> (f64, f64) {
        let mut us: Vec<f64> = points.iter().map(|p| p.0).collect();
        us.sort_by(f64::total_cmp);
        let med = median(&us);
        let feasible = |b: f64, s: f64| {
            b >= 0.0 && s >= 0.0 && points.iter().all(|&(u, v)| v <= s * u + b + 1e-9)
        };
        let mut cands = vec![(points.iter().fold(0.0_f64, |m, p| m.max(p.1)), 0.0)];
        cands.push((0.0, points.iter().filter(|p| p.0 > 0.0).fold(0.0_f64, |m, p| m.max(p.1 / p.0))));
        for a in points {
            for b in points {
                if b.0 > a.0 {
                    let s = (b.1 - a.1) / (b.0 - a.0);
                    cands.push((a.1 - s * a.0, s));
                }
            }
        }
        cands
            .into_iter()
            .filter(|&(b, s)| feasible(b, s))
            .min_by(|x, y| (x.0 + x.1 * med).total_cmp(&(y.0 + y.1 * med)))
            .unwrap()
    }

    #[test]
    fn quadratic_smoothness_is_exact() {
        let q = FiniteSumObjective::single_quadratic(2.5, 1.0, 1).unwrap();
        for alpha in [1.0, 0.5, 0.1, 0.05] {
            let est = local_smoothness(&q, &[-3.0], &[4.0], alpha).unwrap();
            assert!((est.estimate - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_branch_has_zero_smoothness() {
        let p = LowerBoundParams::new(1.0, 1.0, 0.3).unwrap();
        let lb = FiniteSumObjective::lower_bound(p, 1).unwrap();
        // x frozen on the knot-free quadratic branch direction is zero; move only y on the ramp
        let est = local_smoothness(&lb, &[0.5, 3.0], &[0.5, 7.0], 0.1).unwrap();
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn exp_branch_short_segment() {
        let p = LowerBoundParams::new(1.0, 1.0, 0.3).unwrap();
        let lb = FiniteSumObjective::lower_bound(p, 1).unwrap();
        let est = local_smoothness(&lb, &[3.0, 0.0], &[3.0 + 1e-3, 0.0], 0.1).unwrap();
        let truth = lb.analytic_smoothness(&[3.0, 0.0]).unwrap().unwrap();
        assert!((est.estimate / truth - 1.0).abs() < 0.05);
    }

    #[test]
    fn smoothness_errors() {
        let q = FiniteSumObjective::single_quadratic(1.0, 0.0, 1).unwrap();
        assert!(matches!(local_smoothness(&q, &[1.0], &[1.0], 0.1), Err(LabError::DegenerateSegment(_))));
        assert!(matches!(local_smoothness(&q, &[1.0], &[2.0], 0.3), Err(LabError::InvalidAlpha(_))));
        assert!(matches!(local_smoothness(&q, &[1.0], &[2.0], 0.0), Err(LabError::InvalidAlpha(_))));
    }

    #[test]
    fn identical_components_give_unit_envelope() {
        let q = FiniteSumObjective::single_quadratic(1.0, 0.0, 4).unwrap();
        let samples: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.3 - 2.0]).collect();
        let fit = affine_noise_fit(&q, &samples).unwrap();
        assert!(fit.d0_hat.abs() < 1e-12);
        assert!((fit.d1_hat - 1.0).abs() < 1e-12);
        assert!(fit.max_violation <= 1e-9);
    }

    #[test]
    fn zhang_envelope_matches_brute_force() {
        let z = FiniteSumObjective::zhang_counterexample();
        let samples: Vec<Vec<f64>> = (0..61).map(|i| vec![-3.0 + 0.1 * i as f64]).collect();
        let fit = affine_noise_fit(&z, &samples).unwrap();
        assert!(fit.d0_hat > 0.0 && fit.d1_hat > 0.0);
        assert!(fit.max_violation <= 1e-9);
        // closed-form pairs, independent of the objective code
        let pairs: Vec<(f64, f64)> = samples
            .iter()
            .map(|w| {
                let x = w[0];
                let v = (4.0 * (x - 1.0f64).powi(2) + 9.0 * 0.04 * (x - 10.0 / 9.0f64).powi(2)) / 10.0;
                ((0.02 * x).powi(2), v)
            })
            .collect();
        let (b, s) = brute_envelope(&pairs);
        assert!((fit.d0_hat - b).abs() < 1e-9 * b.max(1.0));
        assert!((fit.d1_hat - s).abs() < 1e-7 * s.max(1.0));
    }

    #[test]
    fn envelope_needs_distinct_gradients() {
        let z = FiniteSumObjective::zhang_counterexample();
        let err = affine_noise_fit(&z, &[vec![1.0], vec![1.0]]);
        assert!(matches!(err, Err(LabError::InsufficientSamples(_))));
        assert!(affine_noise_fit(&z, &[vec![1.0]]).is_err());
    }

    #[test]
    fn l0l1_fit_on_exp_branch() {
        let p = LowerBoundParams::new(1.0, 2.0, 0.3).unwrap();
        let pairs: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = 0.6 + 0.1 * i as f64;
                (p.f1_prime(x), p.f1_second(x))
            })
            .collect();
        let fit = l0l1_fit(&pairs).unwrap();
        assert!((fit.log_log_slope - 1.0).abs() < 0.05);
        assert!((fit.log_log_intercept - 2f64.ln()).abs() < 0.05);
        assert!(fit.l0_hat.abs() < 1e-9);
        assert!((fit.l1_hat - 2.0).abs() < 1e-9);
    }

    #[test]
    fn l0l1_fit_flat_and_degenerate() {
        let flat: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 3.0)).collect();
        let fit = l0l1_fit(&flat).unwrap();
        assert!(fit.l1_hat.abs() < 1e-12 && (fit.l0_hat - 3.0).abs() < 1e-12);
        let same = vec![(2.0, 5.0); 4];
        let fit = l0l1_fit(&same).unwrap();
        assert!(fit.flat_fit);
        assert_eq!(fit.r_squared, 0.0);
        assert!(l0l1_fit(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    fn zhang_constants(beta1: f64, beta2: f64) -> TheoryConstants {
        let z = FiniteSumObjective::zhang_counterexample();
        let (d0, d1) = z.known_d0_d1().unwrap();
        let (l0, l1) = z.known_l0_l1().unwrap();
        let pc = ProblemConstants { l0, l1, d0, d1, n: 10, d: 1, f_gap: 1.0 };
        compute_constants(beta1, beta2, 10, 1, 0.1, &pc).unwrap()
    }

    #[test]
    fn bounded_update_beta1_zero_is_below_sqrt_c1() {
        let z = FiniteSumObjective::zhang_counterexample();
        let p = AdamParams::new(0.0, 0.99, 0.1, 0.0, 100, 5).with_lemma_checks();
        let traj = adam_run(&z, &[-2.0], &p).unwrap();
        let tc = zhang_constants(0.0, 0.99);
        let r = check_bounded_update(&traj, &tc, &p).unwrap();
        assert!(r.holds());
        assert!(r.max_observed <= tc.c1.sqrt() * (1.0 + 1e-12));
        assert_eq!(traj.bounded_update_violations, Some(0));
    }

    #[test]
    fn u_gap_is_zero_without_momentum() {
        let z = FiniteSumObjective::zhang_counterexample();
        let p = AdamParams::new(0.0, 0.99, 0.1, 1e-8, 50, 5).with_lemma_checks();
        let traj = adam_run(&z, &[-2.0], &p).unwrap();
        let u = aux_sequence(&traj, 0.0).unwrap();
        assert!(traj.boundaries().zip(&u).all(|(b, uk)| &b.w_start == uk));
        let r = check_u_gap(&traj, &zhang_constants(0.0, 0.99), &p).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn first_u_gap_is_zero() {
        let z = FiniteSumObjective::zhang_counterexample();
        let p = AdamParams::new(0.9, 0.99, 0.1, 1e-8, 5, 5).with_lemma_checks();
        let traj = adam_run(&z, &[-2.0], &p).unwrap();
        let u = aux_sequence(&traj, 0.9).unwrap();
        assert_eq!(u[0], traj.snapshots[0].w_start);
    }

    #[test]
    fn lemma_checks_reject_out_of_domain() {
        let z = FiniteSumObjective::zhang_counterexample();
        let p = AdamParams::new(0.9, 0.5, 0.1, 1e-8, 5, 5);
        let traj = adam_run(&z, &[-2.0], &p).unwrap();
        let tc = zhang_constants(0.5, 0.99);
        assert!(matches!(check_bounded_update(&traj, &tc, &p), Err(LabError::Domain(_))));
        assert!(check_u_gap(&traj, &tc, &p).is_err());
    }

    #[test]
    fn progress_metric_examples() {
        let q = FiniteSumObjective::single_quadratic(1.0, 0.0, 1).unwrap();
        // passes through the minimizer exactly: x = 1 - 1·1 = 0 after one step
        let traj = gd_run(&q, &[1.0], 1.0, 3).unwrap();
        assert_eq!(progress_metric(&traj, 1.0, 1.0, 0.0).unwrap(), 0.0);

        let traj = gd_run(&q, &[1.0], 0.1, 40).unwrap();
        let min_norm = traj.snapshots.iter().map(|s| s.grad_norm).fold(f64::MAX, f64::min);
        let m = progress_metric(&traj, 0.0, 4.0, 0.0).unwrap();
        assert_eq!(m, min_norm / 2.0);
        let short = progress_metric_prefix(&traj, 10, 0.5, 2.0, 1e-8).unwrap();
        let full = progress_metric(&traj, 0.5, 2.0, 1e-8).unwrap();
        assert!(short >= full);

        let empty = gd_run(&q, &[1.0], 0.1, 1).map(|mut t| {
            t.snapshots.clear();
            t
        });
        assert!(matches!(progress_metric(&empty.unwrap(), 1.0, 1.0, 0.0), Err(LabError::MissingSnapshots)));
    }

    #[test]
    fn probe_trajectory_marks_every_step() {
        let q = FiniteSumObjective::single_quadratic(2.0, 0.0, 1).unwrap();
        let traj = gd_run(&q, &[1.0], 0.1, 20).unwrap();
        let probes = probe_trajectory(&q, &traj, 0.1, 3).unwrap();
        assert_eq!(probes.len(), traj.steps.len());
        for (i, p) in probes.iter().enumerate() {
            if i % 3 == 0 {
                let est = p.unwrap().smoothness.unwrap();
                assert!((est.estimate - 2.0).abs() < 1e-9);
            } else {
                assert!(p.is_none());
            }
        }
    }
}
