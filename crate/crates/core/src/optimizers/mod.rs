//! RR-Adam, diminishing-step gradient descent, and the auxiliary sequence
//! used to analyse momentum.

mod adam;
mod gd;
pub mod rng;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use adam::{adam_epoch, adam_init, adam_run, AdamState, EpochOutcome, LEMMA_REL_TOL};
pub use gd::{clipped_gd_run, gd_run};
pub use trajectory::{
    EpochSnapshot, Method, RunStatus, StepRecord, Trajectory, CSV_BASE_COLUMNS,
    CSV_SMOOTHNESS_COLUMN, CSV_TAIL_COLUMNS, DIVERGENCE_GUARD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `η_k = η₁/√k`
    Diminishing,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `m` from one component gradient, `ν` from the largest squared partials at `w₀`.
    PaperTheory,
    ZeroState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eta1: f64,
    pub xi: f64,
    pub schedule: Schedule,
    pub epochs: u64,
    pub init_mode: InitMode,
    pub seed: u64,
    /// RNG stream within `seed`; distinct runs of a sweep use distinct streams.
    #[serde(default)]
    pub stream: u64,
    /// Count bounded-update violations while running; requires `β₁² < β₂`.
    #[serde(default)]
    pub lemma_checks: bool,
}

impl AdamParams {
    /// Diminishing schedule, zero initial state, lemma checks off.
    pub fn new(beta1: f64, beta2: f64, eta1: f64, xi: f64, epochs: u64, seed: u64) -> Self {
        Self {
            beta1,
            beta2,
            eta1,
            xi,
            schedule: Schedule::Diminishing,
            epochs,
            init_mode: InitMode::ZeroState,
            seed,
            stream: 0,
            lemma_checks: false,
        }
    }

    /// Enables lemma checks and switches to the matching initialization.
    pub fn with_lemma_checks(mut self) -> Self {
        self.lemma_checks = true;
        self.init_mode = InitMode::PaperTheory;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(LabError::InvalidParams(format!("beta1 must lie in [0, 1), got {}", self.beta1)));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(LabError::InvalidParams(format!("beta2 must lie in (0, 1), got {}", self.beta2)));
        }
        if !(self.eta1 > 0.0 && self.eta1.is_finite()) {
            return Err(LabError::InvalidParams(format!("eta1 must be positive, got {}", self.eta1)));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return Err(LabError::InvalidParams(format!("xi must be nonnegative, got {}", self.xi)));
        }
        if self.lemma_checks && self.beta1 * self.beta1 >= self.beta2 {
            return Err(LabError::InvalidParams(format!(
                "lemma checks need beta1² < beta2 (beta1 = {}, beta2 = {})",
                self.beta1, self.beta2
            )));
        }
        Ok(())
    }

    /// `η_k` for epoch `k ≥ 1`.
    pub fn step_size(&self, k: u64) -> f64 {
        match self.schedule {
            Schedule::Diminishing => self.eta1 / (k as f64).sqrt(),
            Schedule::Constant => self.eta1,
        }
    }
}

/// `u_k = (w_{k,0} - β₁ w_{k,-1}) / (1 - β₁)` at every recorded boundary,
/// with `w_{1,-1} = w_{1,0}` so that `u_1 = w_{1,0}`.
pub fn aux_sequence(traj: &Trajectory, beta1: f64) -> Result<Vec<Vec<f64>>> {
    if !(0.0..1.0).contains(&beta1) {
        return Err(LabError::InvalidParams(format!("beta1 must lie in [0, 1), got {beta1}")));
    }
    Ok(traj
        .boundaries()
        .map(|b| {
            b.w_start
                .iter()
                .zip(&b.w_prev)
                .map(|(w0, wp)| (w0 - beta1 * wp) / (1.0 - beta1))
                .collect()
        })
        .collect())
}
