use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// `‖w‖∞` beyond which a run is declared diverged.
pub const DIVERGENCE_GUARD: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RrAdam,
    Gd,
    ClippedGd,
}

/// How a run ended. Step indices count updates from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Diverged { step: u64 },
    NonFinite { step: u64 },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// One update `w_{k,i} → w_{k,i+1}`.
///
/// For GD runs every step is its own epoch, `component` is 0 and `m`, `nu`
/// are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub epoch: u64,
    pub index: usize,
    pub component: usize,
    /// Iterate before the update.
    pub w: Vec<f64>,
    /// `‖∇f(w_{k,0})‖` of the enclosing epoch.
    pub epoch_grad_norm: f64,
    /// Gradient used by the update (component gradient for Adam).
    pub grad: Vec<f64>,
    pub m: Vec<f64>,
    pub nu: Vec<f64>,
    /// `|w_{k,i+1} - w_{k,i}|` per coordinate.
    pub update: Vec<f64>,
    /// `f` at the iterate before the update.
    pub f_value: f64,
    pub step_size: f64,
}

impl StepRecord {
    pub fn update_inf_norm(&self) -> f64 {
        self.update.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// State at an epoch boundary: `w_{k,0}`, `w_{k,-1}`, `m_{k,-1}`, `ν_{k,-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSnapshot {
    pub epoch: u64,
    pub w_start: Vec<f64>,
    pub w_prev: Vec<f64>,
    pub m_prev: Vec<f64>,
    pub nu_prev: Vec<f64>,
    pub grad_norm: f64,
    pub f_value: f64,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub steps_per_epoch: usize,
    pub steps: Vec<StepRecord>,
    /// One snapshot per started epoch `k = 1..`.
    pub snapshots: Vec<EpochSnapshot>,
    /// Boundary after the last completed epoch (`k = T + 1`); absent when the run stopped early.
    pub terminal: Option<EpochSnapshot>,
    pub final_w: Vec<f64>,
    pub status: RunStatus,
    /// Count of bounded-update violations, when lemma checks were enabled.
    pub bounded_update_violations: Option<usize>,
}

pub const CSV_BASE_COLUMNS: [&str; 3] = ["k", "i", "tau"];
pub const CSV_TAIL_COLUMNS: [&str; 3] = ["grad_norm_epoch_start", "f_value", "update_inf_norm"];
pub const CSV_SMOOTHNESS_COLUMN: &str = "smoothness_estimate";

impl Trajectory {
    pub fn snapshots(&self) -> &[EpochSnapshot] {
        &self.snapshots
    }

    pub fn completed_epochs(&self) -> usize {
        if self.status.is_completed() {
            self.snapshots.len()
        } else {
            self.snapshots.len().saturating_sub(1)
        }
    }

    /// Boundaries `k = 1, …` including the terminal one.
    pub fn boundaries(&self) -> impl Iterator<Item = &EpochSnapshot> {
        self.snapshots.iter().chain(self.terminal.iter())
    }

    /// Every iterate in order: the pre-update point of each step, then `final_w`.
    pub fn iterates(&self) -> Vec<&[f64]> {
        self.steps
            .iter()
            .map(|s| s.w.as_slice())
            .chain(std::iter::once(self.final_w.as_slice()))
            .collect()
    }

    pub fn header(&self, with_smoothness: bool) -> Vec<String> {
        let mut cols: Vec<String> = CSV_BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        cols.extend((0..self.d).map(|l| format!("w{l}")));
        cols.extend(CSV_TAIL_COLUMNS.iter().map(|s| s.to_string()));
        if with_smoothness {
            cols.push(CSV_SMOOTHNESS_COLUMN.to_string());
        }
        cols
    }

    /// Per-step CSV. `smoothness`, when given, must hold one entry per step;
    /// absent estimates are written as empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W, smoothness: Option<&[Option<f64>]>) -> std::io::Result<()> {
        if let Some(s) = smoothness {
            if s.len() != self.steps.len() {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    format!("{} smoothness entries for {} steps", s.len(), self.steps.len()),
                ));
            }
        }
        writeln!(out, "{}", self.header(smoothness.is_some()).join(","))?;
        for (idx, step) in self.steps.iter().enumerate() {
            write!(out, "{},{},{}", step.epoch, step.index, step.component)?;
            for v in &step.w {
                write!(out, ",{v}")?;
            }
            write!(
                out,
                ",{},{},{}",
                step.epoch_grad_norm,
                step.f_value,
                step.update_inf_norm()
            )?;
            if let Some(s) = smoothness {
                match s[idx] {
                    Some(v) => write!(out, ",{v}")?,
                    None => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, smoothness: Option<&[Option<f64>]>) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, smoothness)
            .map_err(|e| LabError::InvalidParams(e.to_string()))?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Guard applied after every update.
pub(crate) fn guard(w: &[f64], step: u64) -> Option<RunStatus> {
    if w.iter().any(|v| !v.is_finite()) {
        Some(RunStatus::NonFinite { step })
    } else if inf_norm(w) > DIVERGENCE_GUARD {
        Some(RunStatus::Diverged { step })
    } else {
        None
    }
}
