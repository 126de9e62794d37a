use crate::error::{LabError, Result};
use crate::landscapes::FiniteSumObjective;
use crate::theory;

use super::rng::{is_permutation, permutation, run_rng, RunRng};
use super::trajectory::{guard, l2_norm, EpochSnapshot, Method, RunStatus, StepRecord, Trajectory};
use super::{AdamParams, InitMode};

/// Relative slack on the bounded-update check.
pub const LEMMA_REL_TOL: f64 = 1e-12;

/// Mutable state of RR-Adam between updates.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub w: Vec<f64>,
    /// The iterate before the latest update; equals `w` before the first one.
    pub w_prev: Vec<f64>,
    pub m: Vec<f64>,
    pub nu: Vec<f64>,
    /// Next epoch to run (starts at 1).
    pub k: u64,
    /// Position inside the epoch; 0 between epochs.
    pub i: usize,
    /// Permutation of the latest epoch.
    pub tau: Vec<usize>,
    pub steps_taken: u64,
    rng: RunRng,
}

/// Output of one epoch.
#[derive(Debug, Clone)]
pub struct EpochOutcome {
    pub state: AdamState,
    pub snapshot: EpochSnapshot,
    pub records: Vec<StepRecord>,
    pub termination: Option<RunStatus>,
    pub bounded_update_violations: usize,
}

fn check_start(obj: &FiniteSumObjective, w0: &[f64]) -> Result<()> {
    if w0.len() != obj.d() {
        return Err(LabError::DimensionMismatch {
            expected: obj.d(),
            got: w0.len(),
        });
    }
    if w0.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite("initial point".into()));
    }
    Ok(())
}

/// State at `(k, i) = (1, 0)`.
///
/// `PaperTheory` seeds `m_{1,-1} = ∇f_0(w₀)` and `ν_{l,1,-1} = max_j ∂_l f_j(w₀)²`;
/// `ZeroState` starts both at zero.
pub fn adam_init(obj: &FiniteSumObjective, w0: &[f64], params: &AdamParams) -> Result<AdamState> {
    params.validate()?;
    check_start(obj, w0)?;
    let d = obj.d();
    let (m, nu) = match params.init_mode {
        InitMode::ZeroState => (vec![0.0; d], vec![0.0; d]),
        InitMode::PaperTheory => {
            let m = obj.component_grad(0, w0)?;
            let mut nu = vec![0.0_f64; d];
            for j in 0..obj.n() {
                let g = obj.component_grad(j, w0)?;
                nu.iter_mut().zip(&g).for_each(|(v, gl)| *v = v.max(gl * gl));
            }
            (m, nu)
        }
    };
    Ok(AdamState {
        w: w0.to_vec(),
        w_prev: w0.to_vec(),
        m,
        nu,
        k: 1,
        i: 0,
        tau: Vec::new(),
        steps_taken: 0,
        rng: run_rng(params.seed, params.stream),
    })
}

/// One reshuffled pass over all `n` components.
pub fn adam_epoch(
    state: AdamState,
    obj: &FiniteSumObjective,
    params: &AdamParams,
) -> Result<EpochOutcome> {
    let d = obj.d();
    if state.w.len() != d || state.m.len() != d || state.nu.len() != d {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: state.w.len(),
        });
    }
    let mut state = state;
    let n = obj.n();
    let k = state.k;
    let eta = params.step_size(k);
    let (beta1, beta2, xi) = (params.beta1, params.beta2, params.xi);
    let c1 = params
        .lemma_checks
        .then(|| theory::c1(beta1, beta2));

    let tau = permutation(&mut state.rng, n);
    debug_assert!(is_permutation(&tau));

    let epoch_grad_norm = l2_norm(&obj.full_grad(&state.w)?);
    let snapshot = EpochSnapshot {
        epoch: k,
        w_start: state.w.clone(),
        w_prev: state.w_prev.clone(),
        m_prev: state.m.clone(),
        nu_prev: state.nu.clone(),
        grad_norm: epoch_grad_norm,
        f_value: obj.value(&state.w)?,
        permutation: tau.clone(),
    };

    let mut records = Vec::with_capacity(n);
    let mut violations = 0;
    let mut termination = None;
    for (i, &component) in tau.iter().enumerate() {
        state.i = i;
        let f_value = if i == 0 {
            snapshot.f_value
        } else {
            obj.value(&state.w)?
        };
        let g = obj.component_grad(component, &state.w)?;
        let mut update = vec![0.0; d];
        let w_before = state.w.clone();
        for l in 0..d {
            state.nu[l] = beta2 * state.nu[l] + (1.0 - beta2) * g[l] * g[l];
            state.m[l] = beta1 * state.m[l] + (1.0 - beta1) * g[l];
            // 0/0 only arises with m = 0, where the step is zero
            let ratio = if state.m[l] == 0.0 {
                0.0
            } else {
                state.m[l] / (state.nu[l].sqrt() + xi)
            };
            let delta = eta * ratio;
            if let Some(c1) = c1 {
                let bound = c1 * (1.0 + LEMMA_REL_TOL);
                if ratio.abs() > bound || delta.abs() > bound * eta {
                    violations += 1;
                }
            }
            state.w[l] -= delta;
            update[l] = delta.abs();
        }
        state.w_prev = w_before.clone();
        state.steps_taken += 1;
        records.push(StepRecord {
            epoch: k,
            index: i,
            component,
            w: w_before,
            epoch_grad_norm,
            grad: g,
            m: state.m.clone(),
            nu: state.nu.clone(),
            update,
            f_value,
            step_size: eta,
        });
        if let Some(status) = guard(&state.w, state.steps_taken) {
            termination = Some(status);
            break;
        }
    }
    state.tau = tau;
    if termination.is_none() {
        state.k += 1;
        state.i = 0;
    }
    Ok(EpochOutcome {
        state,
        snapshot,
        records,
        termination,
        bounded_update_violations: violations,
    })
}

/// Runs `params.epochs` epochs of RR-Adam from `w0`.
///
/// The gradient of step `(k, i)` is taken at the current iterate `w_{k,i}`.
/// There is no bias correction. Divergence is reported through
/// [`Trajectory::status`], never as an error.
pub fn adam_run(obj: &FiniteSumObjective, w0: &[f64], params: &AdamParams) -> Result<Trajectory> {
    let mut state = adam_init(obj, w0, params)?;
    let n = obj.n();
    let mut steps = Vec::with_capacity(n * params.epochs as usize);
    let mut snapshots = Vec::with_capacity(params.epochs as usize);
    let mut status = RunStatus::Completed;
    let mut violations = 0;
    for _ in 0..params.epochs {
        let out = adam_epoch(state, obj, params)?;
        state = out.state;
        steps.extend(out.records);
        snapshots.push(out.snapshot);
        violations += out.bounded_update_violations;
        if let Some(t) = out.termination {
            status = t;
            break;
        }
    }
    let terminal = if status.is_completed() {
        Some(EpochSnapshot {
            epoch: state.k,
            w_start: state.w.clone(),
            w_prev: state.w_prev.clone(),
            m_prev: state.m.clone(),
            nu_prev: state.nu.clone(),
            grad_norm: l2_norm(&obj.full_grad(&state.w)?),
            f_value: obj.value(&state.w)?,
            permutation: Vec::new(),
        })
    } else {
        None
    };
    Ok(Trajectory {
        method: Method::RrAdam,
        n,
        d: obj.d(),
        steps_per_epoch: n,
        steps,
        snapshots,
        terminal,
        final_w: state.w,
        status,
        bounded_update_violations: params.lemma_checks.then_some(violations),
    })
}
