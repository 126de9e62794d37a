//! Finite-sum objectives `f(w) = (1/n) Σ_j f_j(w)` over ℝᵈ.
//!
//! The built-in kinds are the adversarial landscapes the optimizers are
//! exercised on:
//!
//! * [`ObjectiveKind::ZhangCounterexample`]: ten one-dimensional components,
//!   `f_0(x) = (x - 1)²` and `f_j(x) = -0.1 (x - 10/9)²` for `1 ≤ j ≤ 9`.
//!   RR-Adam does not reach the stationary point of their mean.
//! * [`ObjectiveKind::LowerBound`]: `f(x, y) = f₁(x) + f₂(y)` where `f₁`
//!   grows exponentially outside `[-1/L₁, 1/L₁]` and `f₂` is a Huber-like
//!   ramp with slope `ε`. Diminishing-step GD either blows up or crawls on it.
//! * [`ObjectiveKind::QuadraticSum`]: separable quadratics
//!   `f_j(w) = ½ Σ_l a_{j,l} (w_l - c_{j,l})²`.
//! * [`ObjectiveKind::Custom`]: user callbacks.
//!
//! The full objective is always the *average* of the components. Components
//! are stored exactly as printed in their closed forms and then multiplied by
//! `scale`; `scale = n` recovers the sum convention.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::theory::{self, Thm2Construction};

pub type ComponentValueFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;
pub type ComponentGradFn = Arc<dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync>;
/// Spectral norm of the Hessian of the *full* objective at a point.
pub type CurvatureFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Parameters of the two-dimensional lower-bound landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundParams {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    pub epsilon: f64,
}

impl LowerBoundParams {
    pub fn new(l0: f64, l1: f64, epsilon: f64) -> Result<Self> {
        if !(l0 > 0.0 && l1 > 0.0 && epsilon > 0.0) || !(l0 * l1 * epsilon).is_finite() {
            return Err(LabError::InvalidParams(format!(
                "lower bound needs positive finite L0, L1, epsilon (got {l0}, {l1}, {epsilon})"
            )));
        }
        Ok(Self { l0, l1, epsilon })
    }

    fn knot(&self) -> f64 {
        1.0 / self.l1
    }

    pub fn f1(&self, x: f64) -> f64 {
        let (l0, l1) = (self.l0, self.l1);
        if x >= self.knot() {
            l0 * (l1 * x - 1.0).exp() / (l1 * l1)
        } else if x <= -self.knot() {
            l0 * (-l1 * x - 1.0).exp() / (l1 * l1)
        } else {
            0.5 * l0 * x * x + l0 / (2.0 * l1 * l1)
        }
    }

    pub fn f1_prime(&self, x: f64) -> f64 {
        let (l0, l1) = (self.l0, self.l1);
        if x >= self.knot() {
            l0 * (l1 * x - 1.0).exp() / l1
        } else if x <= -self.knot() {
            -l0 * (-l1 * x - 1.0).exp() / l1
        } else {
            l0 * x
        }
    }

    /// `f₁''`; at the knots both one-sided values equal `L₀`.
    pub fn f1_second(&self, x: f64) -> f64 {
        if x.abs() >= self.knot() {
            self.l0 * (self.l1 * x.abs() - 1.0).exp()
        } else {
            self.l0
        }
    }

    pub fn min_f1(&self) -> f64 {
        self.l0 / (2.0 * self.l1 * self.l1)
    }

    pub fn f2(&self, y: f64) -> f64 {
        let eps = self.epsilon;
        if y >= 1.0 {
            eps * (y - 1.0) + 0.5 * eps
        } else if y <= -1.0 {
            -eps * (y + 1.0) + 0.5 * eps
        } else {
            0.5 * eps * y * y
        }
    }

    pub fn f2_prime(&self, y: f64) -> f64 {
        if y >= 1.0 {
            self.epsilon
        } else if y <= -1.0 {
            -self.epsilon
        } else {
            self.epsilon * y
        }
    }

    /// `f₂''`; at `|y| = 1` the larger one-sided value `ε` is returned.
    pub fn f2_second(&self, y: f64) -> f64 {
        if y.abs() <= 1.0 {
            self.epsilon
        } else {
            0.0
        }
    }
}

/// Callbacks backing a [`ObjectiveKind::Custom`] objective.
#[derive(Clone)]
pub struct CustomObjective {
    pub name: String,
    pub value: ComponentValueFn,
    pub grad: ComponentGradFn,
    pub curvature: Option<CurvatureFn>,
}

impl fmt::Debug for CustomObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomObjective")
            .field("name", &self.name)
            .field("has_curvature", &self.curvature.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum ObjectiveKind {
    ZhangCounterexample,
    LowerBound(LowerBoundParams),
    QuadraticSum {
        curvatures: Vec<Vec<f64>>,
        centers: Vec<Vec<f64>>,
    },
    Custom(CustomObjective),
}

/// An `n`-component objective over ℝᵈ. Immutable once built.
#[derive(Debug, Clone)]
pub struct FiniteSumObjective {
    n: usize,
    d: usize,
    kind: ObjectiveKind,
    scale: f64,
    known_min: Option<f64>,
    known_d0_d1: Option<(f64, f64)>,
    known_l0_l1: Option<(f64, f64)>,
}

const ZHANG_SHIFT: f64 = 10.0 / 9.0;

impl FiniteSumObjective {
    /// The ten-component counterexample on which RR-Adam stalls away from
    /// the stationary point.
    pub fn zhang_counterexample() -> Self {
        Self::zhang_counterexample_scaled(1.0).expect("unit scale is valid")
    }

    pub fn zhang_counterexample_scaled(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        // Mean gradient is 0.02 x, so u = ‖∇f‖² = 4e-4 x². The mean squared
        // component gradient is v = 0.436 x² - 0.88 x + 4/9 (unit scale).
        // v ≤ D₁ u + D₀ holds with D₁ u = 0.872 x² and D₀ = 4/9 + 0.88²/(4·0.436).
        let (a, b, c0) = (0.436, -0.88, 4.0 / 9.0);
        let d1 = 2.0 * a / 4e-4;
        let d0 = (c0 + b * b / (4.0 * a)) * scale * scale;
        Ok(Self {
            n: 10,
            d: 1,
            kind: ObjectiveKind::ZhangCounterexample,
            scale,
            // mean = 0.01 x² - 1/90
            known_min: Some(-scale / 90.0),
            known_d0_d1: Some((d0, d1)),
            known_l0_l1: Some((2.0 * scale, 0.0)),
        })
    }

    /// `n` identical copies of `f₁(x) + f₂(y)`.
    pub fn lower_bound(params: LowerBoundParams, n: usize) -> Result<Self> {
        Self::lower_bound_scaled(params, n, 1.0)
    }

    pub fn lower_bound_scaled(params: LowerBoundParams, n: usize, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        let params = LowerBoundParams::new(params.l0, params.l1, params.epsilon)?;
        if n == 0 {
            return Err(LabError::InvalidParams("n must be at least 1".into()));
        }
        Ok(Self {
            n,
            d: 2,
            kind: ObjectiveKind::LowerBound(params),
            scale,
            known_min: Some(params.min_f1() * scale),
            known_d0_d1: Some((0.0, 1.0)),
            known_l0_l1: Some((params.l0.max(params.epsilon) * scale, params.l1)),
        })
    }

    /// Separable quadratics `f_j(w) = ½ Σ_l a_{j,l} (w_l - c_{j,l})²`, one row per component.
    pub fn quadratic_sum(curvatures: Vec<Vec<f64>>, centers: Vec<Vec<f64>>) -> Result<Self> {
        Self::quadratic_sum_scaled(curvatures, centers, 1.0)
    }

    pub fn quadratic_sum_scaled(
        curvatures: Vec<Vec<f64>>,
        centers: Vec<Vec<f64>>,
        scale: f64,
    ) -> Result<Self> {
        check_scale(scale)?;
        let n = curvatures.len();
        if n == 0 || centers.len() != n {
            return Err(LabError::InvalidParams(format!(
                "quadratic sum needs matching non-empty curvature/center rows ({} vs {})",
                n,
                centers.len()
            )));
        }
        let d = curvatures[0].len();
        if d == 0
            || curvatures.iter().chain(centers.iter()).any(|row| row.len() != d)
            || curvatures.iter().chain(centers.iter()).flatten().any(|v| !v.is_finite())
        {
            return Err(LabError::InvalidParams(
                "quadratic sum rows must share a positive dimension and be finite".into(),
            ));
        }
        let mut obj = Self {
            n,
            d,
            kind: ObjectiveKind::QuadraticSum {
                curvatures,
                centers,
            },
            scale,
            known_min: None,
            known_d0_d1: None,
            known_l0_l1: None,
        };
        obj.known_min = obj.quadratic_minimum();
        if let ObjectiveKind::QuadraticSum { curvatures, .. } = &obj.kind {
            let l0 = curvatures.iter().flatten().fold(0.0_f64, |m, a| m.max(a.abs()));
            obj.known_l0_l1 = Some((l0 * scale, 0.0));
        }
        Ok(obj)
    }

    /// A one-dimensional quadratic `½ a (x - c)²` repeated `n` times.
    pub fn single_quadratic(a: f64, c: f64, n: usize) -> Result<Self> {
        Self::quadratic_sum(vec![vec![a]; n], vec![vec![c]; n])
    }

    pub fn custom(n: usize, d: usize, custom: CustomObjective) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(LabError::InvalidParams("n and d must be at least 1".into()));
        }
        Ok(Self {
            n,
            d,
            kind: ObjectiveKind::Custom(custom),
            scale: 1.0,
            known_min: None,
            known_d0_d1: None,
            known_l0_l1: None,
        })
    }

    pub fn with_known_min(mut self, min: f64) -> Self {
        self.known_min = Some(min);
        self
    }

    pub fn with_known_d0_d1(mut self, d0: f64, d1: f64) -> Self {
        self.known_d0_d1 = Some((d0, d1));
        self
    }

    pub fn with_known_l0_l1(mut self, l0: f64, l1: f64) -> Self {
        self.known_l0_l1 = Some((l0, l1));
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn known_min(&self) -> Option<f64> {
        self.known_min
    }

    pub fn known_d0_d1(&self) -> Option<(f64, f64)> {
        self.known_d0_d1
    }

    pub fn known_l0_l1(&self) -> Option<(f64, f64)> {
        self.known_l0_l1
    }

    pub fn lower_bound_params(&self) -> Option<&LowerBoundParams> {
        match &self.kind {
            ObjectiveKind::LowerBound(p) => Some(p),
            _ => None,
        }
    }

    fn check_point(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.d {
            return Err(LabError::DimensionMismatch {
                expected: self.d,
                got: w.len(),
            });
        }
        if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("point coordinate {bad}")));
        }
        Ok(())
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n {
            return Err(LabError::IndexOutOfRange { index: j, n: self.n });
        }
        Ok(())
    }

    /// `f_j(w)`.
    pub fn component_value(&self, j: usize, w: &[f64]) -> Result<f64> {
        self.check_index(j)?;
        self.check_point(w)?;
        let raw = match &self.kind {
            ObjectiveKind::ZhangCounterexample => {
                let x = w[0];
                if j == 0 {
                    (x - 1.0).powi(2)
                } else {
                    -0.1 * (x - ZHANG_SHIFT).powi(2)
                }
            }
            ObjectiveKind::LowerBound(p) => p.f1(w[0]) + p.f2(w[1]),
            ObjectiveKind::QuadraticSum {
                curvatures,
                centers,
            } => curvatures[j]
                .iter()
                .zip(&centers[j])
                .zip(w)
                .map(|((a, c), x)| 0.5 * a * (x - c).powi(2))
                .sum(),
            ObjectiveKind::Custom(c) => (c.value)(j, w),
        };
        Ok(self.scale * raw)
    }

    /// `∇f_j(w)`. Piecewise kinds are C¹, so the branch taken at a knot is immaterial.
    pub fn component_grad(&self, j: usize, w: &[f64]) -> Result<Vec<f64>> {
        self.check_index(j)?;
        self.check_point(w)?;
        let mut g = match &self.kind {
            ObjectiveKind::ZhangCounterexample => {
                let x = w[0];
                if j == 0 {
                    vec![2.0 * (x - 1.0)]
                } else {
                    vec![-0.2 * (x - ZHANG_SHIFT)]
                }
            }
            ObjectiveKind::LowerBound(p) => vec![p.f1_prime(w[0]), p.f2_prime(w[1])],
            ObjectiveKind::QuadraticSum {
                curvatures,
                centers,
            } => curvatures[j]
                .iter()
                .zip(&centers[j])
                .zip(w)
                .map(|((a, c), x)| a * (x - c))
                .collect(),
            ObjectiveKind::Custom(c) => {
                let g = (c.grad)(j, w);
                if g.len() != self.d {
                    return Err(LabError::DimensionMismatch {
                        expected: self.d,
                        got: g.len(),
                    });
                }
                g
            }
        };
        if self.scale != 1.0 {
            g.iter_mut().for_each(|v| *v *= self.scale);
        }
        Ok(g)
    }

    /// `f(w) = (1/n) Σ_j f_j(w)`.
    pub fn value(&self, w: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for j in 0..self.n {
            sum += self.component_value(j, w)?;
        }
        Ok(sum / self.n as f64)
    }

    /// `∇f(w) = (1/n) Σ_j ∇f_j(w)`.
    pub fn full_grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.d];
        for j in 0..self.n {
            let g = self.component_grad(j, w)?;
            acc.iter_mut().zip(&g).for_each(|(a, v)| *a += v);
        }
        let n = self.n as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(acc)
    }

    /// Exact spectral norm of `∇²f(w)` where a closed form exists.
    ///
    /// Every built-in kind has a diagonal Hessian; `Custom` returns `None`
    /// unless a curvature callback was registered.
    pub fn analytic_smoothness(&self, w: &[f64]) -> Result<Option<f64>> {
        self.check_point(w)?;
        let raw = match &self.kind {
            // mean of 2 and nine copies of -0.2
            ObjectiveKind::ZhangCounterexample => Some((2.0 - 9.0 * 0.2) / 10.0),
            ObjectiveKind::LowerBound(p) => Some(p.f1_second(w[0]).max(p.f2_second(w[1]))),
            ObjectiveKind::QuadraticSum { curvatures, .. } => {
                let n = self.n as f64;
                let norm = (0..self.d)
                    .map(|l| (curvatures.iter().map(|row| row[l]).sum::<f64>() / n).abs())
                    .fold(0.0, f64::max);
                Some(norm)
            }
            ObjectiveKind::Custom(c) => return Ok(c.curvature.as_ref().map(|f| f(w))),
        };
        Ok(raw.map(|v| v * self.scale.abs()))
    }

    fn quadratic_minimum(&self) -> Option<f64> {
        let ObjectiveKind::QuadraticSum {
            curvatures,
            centers,
        } = &self.kind
        else {
            return None;
        };
        let mut w_star = vec![0.0; self.d];
        for (l, w) in w_star.iter_mut().enumerate() {
            let total: f64 = curvatures.iter().map(|row| row[l]).sum();
            if total > 0.0 && curvatures.iter().all(|row| row[l] >= 0.0) {
                *w = curvatures
                    .iter()
                    .zip(centers)
                    .map(|(a, c)| a[l] * c[l])
                    .sum::<f64>()
                    / total;
            } else if curvatures.iter().any(|row| row[l] != 0.0) {
                return None;
            }
        }
        self.value(&w_star).ok()
    }

    /// Serializable description, unavailable for `Custom` objectives.
    pub fn to_desc(&self) -> Result<ObjectiveDesc> {
        let scale = (self.scale != 1.0).then_some(self.scale);
        let (kind, parameters) = match &self.kind {
            ObjectiveKind::ZhangCounterexample => (
                DescKind::ZhangCounterexample,
                DescParameters {
                    scale,
                    ..Default::default()
                },
            ),
            ObjectiveKind::LowerBound(p) => (
                DescKind::LowerBound,
                DescParameters {
                    l0: Some(p.l0),
                    l1: Some(p.l1),
                    epsilon: Some(p.epsilon),
                    scale,
                    ..Default::default()
                },
            ),
            ObjectiveKind::QuadraticSum {
                curvatures,
                centers,
            } => (
                DescKind::QuadraticSum,
                DescParameters {
                    curvatures: Some(curvatures.clone()),
                    centers: Some(centers.clone()),
                    scale,
                    ..Default::default()
                },
            ),
            ObjectiveKind::Custom(_) => {
                return Err(LabError::Config(
                    "custom objectives hold callbacks and cannot be serialized".into(),
                ))
            }
        };
        Ok(ObjectiveDesc {
            kind,
            n: self.n,
            d: self.d,
            parameters,
        })
    }

    pub fn from_desc(desc: &ObjectiveDesc) -> Result<Self> {
        let p = &desc.parameters;
        let scale = p.scale.unwrap_or(1.0);
        let obj = match desc.kind {
            DescKind::ZhangCounterexample => Self::zhang_counterexample_scaled(scale)?,
            DescKind::LowerBound => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| LabError::Config(format!("lower_bound needs `{name}`")))
                };
                let params = LowerBoundParams::new(
                    need(p.l0, "L0")?,
                    need(p.l1, "L1")?,
                    need(p.epsilon, "epsilon")?,
                )?;
                Self::lower_bound_scaled(params, desc.n, scale)?
            }
            DescKind::QuadraticSum => {
                let (Some(a), Some(c)) = (p.curvatures.clone(), p.centers.clone()) else {
                    return Err(LabError::Config(
                        "quadratic_sum needs `curvatures` and `centers`".into(),
                    ));
                };
                Self::quadratic_sum_scaled(a, c, scale)?
            }
            DescKind::Custom => {
                return Err(LabError::Config(
                    "custom objectives must be registered in code, not built from JSON".into(),
                ))
            }
        };
        if obj.n != desc.n || obj.d != desc.d {
            return Err(LabError::Config(format!(
                "objective desc declares (n, d) = ({}, {}) but the {:?} kind implies ({}, {})",
                desc.n, desc.d, desc.kind, obj.n, obj.d
            )));
        }
        Ok(obj)
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidParams(format!(
            "scale must be positive and finite, got {scale}"
        )))
    }
}

/// JSON form of an objective: `{"kind", "n", "d", "parameters"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveDesc {
    pub kind: DescKind,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub parameters: DescParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescKind {
    ZhangCounterexample,
    LowerBound,
    QuadraticSum,
    Custom,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescParameters {
    #[serde(rename = "L0", default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(rename = "L1", default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvatures: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    /// Multiplier on every component; `n` gives the sum convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

/// Builds the lower-bound landscape together with its worst-case start point.
///
/// `f_bar` only enters through `ε`; the suboptimality at the returned start
/// is fixed by `M` (see [`Thm2Construction::natural_f_bar`]).
pub fn make_lowerbound(
    l0: f64,
    l1: f64,
    horizon: u64,
    m: f64,
    f_bar: f64,
) -> Result<(FiniteSumObjective, Vec<f64>, Thm2Construction)> {
    let construction = theory::theorem2_construction(l0, l1, horizon, m, f_bar)?;
    let params = LowerBoundParams::new(l0, l1, construction.epsilon)?;
    let obj = FiniteSumObjective::lower_bound(params, 1)?;
    let w0 = vec![construction.x0, construction.y0];
    Ok((obj, w0, construction))
}
