use crate::error::{LabError, Result};
use crate::landscapes::FiniteSumObjective;

use super::trajectory::{guard, l2_norm, EpochSnapshot, Method, RunStatus, StepRecord, Trajectory};

/// Full-gradient descent `w_k = w_{k-1} - η_k ∇f(w_{k-1})` with `η_k = η₁/√k`.
pub fn gd_run(obj: &FiniteSumObjective, w0: &[f64], eta1: f64, steps: u64) -> Result<Trajectory> {
    descend(obj, w0, eta1, steps, None)
}

/// [`gd_run`] with the gradient rescaled by `min(1, clip/‖g‖)` before each step.
pub fn clipped_gd_run(
    obj: &FiniteSumObjective,
    w0: &[f64],
    eta1: f64,
    clip_threshold: f64,
    steps: u64,
) -> Result<Trajectory> {
    if !(clip_threshold > 0.0) {
        return Err(LabError::InvalidParams(format!(
            "clip threshold must be positive, got {clip_threshold}"
        )));
    }
    descend(obj, w0, eta1, steps, Some(clip_threshold))
}

fn descend(
    obj: &FiniteSumObjective,
    w0: &[f64],
    eta1: f64,
    steps: u64,
    clip: Option<f64>,
) -> Result<Trajectory> {
    if !(eta1 > 0.0 && eta1.is_finite()) {
        return Err(LabError::InvalidParams(format!("eta1 must be positive, got {eta1}")));
    }
    if steps == 0 {
        return Err(LabError::InvalidParams("GD needs at least one step".into()));
    }
    if w0.len() != obj.d() {
        return Err(LabError::DimensionMismatch {
            expected: obj.d(),
            got: w0.len(),
        });
    }
    let mut w = w0.to_vec();
    let mut w_prev = w0.to_vec();
    let mut records = Vec::with_capacity(steps as usize);
    let mut snapshots = Vec::with_capacity(steps as usize);
    let mut status = RunStatus::Completed;

    for k in 1..=steps {
        let eta = eta1 / (k as f64).sqrt();
        let grad = obj.full_grad(&w)?;
        let norm = l2_norm(&grad);
        let f_value = obj.value(&w)?;
        snapshots.push(EpochSnapshot {
            epoch: k,
            w_start: w.clone(),
            w_prev: w_prev.clone(),
            m_prev: Vec::new(),
            nu_prev: Vec::new(),
            grad_norm: norm,
            f_value,
            permutation: vec![0],
        });
        let factor = match clip {
            Some(c) if norm > c => c / norm,
            _ => 1.0,
        };
        let update: Vec<f64> = grad.iter().map(|g| (eta * factor * g).abs()).collect();
        let before = w.clone();
        w.iter_mut()
            .zip(&grad)
            .for_each(|(x, g)| *x -= eta * factor * g);
        w_prev = before.clone();
        records.push(StepRecord {
            epoch: k,
            index: 0,
            component: 0,
            w: before,
            epoch_grad_norm: norm,
            grad,
            m: Vec::new(),
            nu: Vec::new(),
            update,
            f_value,
            step_size: eta,
        });
        if let Some(s) = guard(&w, k) {
            status = s;
            break;
        }
    }

    let terminal = if status.is_completed() {
        Some(EpochSnapshot {
            epoch: steps + 1,
            w_start: w.clone(),
            w_prev,
            m_prev: Vec::new(),
            nu_prev: Vec::new(),
            grad_norm: l2_norm(&obj.full_grad(&w)?),
            f_value: obj.value(&w)?,
            permutation: vec![0],
        })
    } else {
        None
    };
    Ok(Trajectory {
        method: if clip.is_some() { Method::ClippedGd } else { Method::Gd },
        n: obj.n(),
        d: obj.d(),
        steps_per_epoch: 1,
        steps: records,
        snapshots,
        terminal,
        final_w: w,
        status,
        bounded_update_violations: None,
    })
}
