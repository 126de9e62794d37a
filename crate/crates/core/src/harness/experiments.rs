use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::landscapes::{make_lowerbound, FiniteSumObjective};
use crate::optimizers::rng::{stream_id, RNG_ALGORITHM};
use crate::optimizers::{adam_run, gd_run, AdamParams, Method, RunStatus, Trajectory};
use crate::probes::{self, check_bounded_update, check_u_gap, l0l1_fit, probe_trajectory, LemmaReport};
use crate::theory::{
    check_theorem1, compute_constants, gamma_threshold, BoundReport, BoundVerdict, ProblemConstants,
    Thm2Construction,
};

/// Slack on the per-step `√2` growth check, in log units.
pub const GROWTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub rng_algorithm: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub method: Method,
    pub seed: Option<u64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eta1: f64,
    pub eta_factor: Option<f64>,
    /// Absent for skipped grid points.
    pub status: Option<RunStatus>,
    pub epochs: usize,
    /// Mean of `‖∇f(w_{k,0})‖` over the final epochs.
    pub terminal_grad_norm: Option<f64>,
    pub progress_metric: Option<f64>,
    pub min_grad_norm: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub lemmas: Vec<LemmaReport>,
    pub bound: Option<BoundReport>,
    pub skipped: Option<String>,
}

impl RunSummary {
    fn new(run_id: String, method: Method, eta1: f64) -> Self {
        Self {
            run_id,
            method,
            seed: None,
            beta1: None,
            beta2: None,
            eta1,
            eta_factor: None,
            status: None,
            epochs: 0,
            terminal_grad_norm: None,
            progress_metric: None,
            min_grad_norm: None,
            metrics: BTreeMap::new(),
            lemmas: Vec::new(),
            bound: None,
            skipped: None,
        }
    }

    fn completed(&self) -> bool {
        self.status.map_or(false, |s| s.is_completed())
    }
}

/// A sweep-level assertion and the runs it was evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub runs: Vec<String>,
}

impl Conclusion {
    fn new(name: &str, passed: bool, detail: String, runs: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
            runs,
        }
    }
}

/// Named columns of one plot series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Per-run data kept for emission only.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub run_id: String,
    pub trajectory: Option<Trajectory>,
    pub smoothness: Option<Vec<Option<f64>>>,
    pub plot: PlotData,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub environment: Environment,
    pub construction: Option<Thm2Construction>,
    /// Sorted by run id.
    pub runs: Vec<RunSummary>,
    pub conclusions: Vec<Conclusion>,
    pub passed: bool,
    #[serde(skip)]
    pub artifacts: Vec<RunArtifact>,
}

impl ExperimentReport {
    fn assemble(
        experiment: Experiment,
        construction: Option<Thm2Construction>,
        mut outcomes: Vec<(RunSummary, RunArtifact)>,
        conclusions: Vec<Conclusion>,
    ) -> Self {
        outcomes.sort_by(|a, b| a.0.run_id.cmp(&b.0.run_id));
        let (runs, artifacts): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
        let passed = conclusions.iter().all(|c| c.passed);
        Self {
            experiment,
            environment: Environment::current(),
            construction,
            runs,
            conclusions,
            passed,
            artifacts,
        }
    }

    pub fn run(&self, run_id: &str) -> Option<&RunSummary> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }

    pub fn conclusion(&self, name: &str) -> Option<&Conclusion> {
        self.conclusions.iter().find(|c| c.name == name)
    }
}

/// Runs every job, up to `workers` at a time, and returns results in job order.
fn run_all<S, T, F>(jobs: &[S], workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(&f).collect())
}

fn objective(cfg: &ExperimentConfig) -> Result<FiniteSumObjective> {
    let desc = cfg
        .objective
        .as_ref()
        .ok_or_else(|| LabError::Config("config has no objective".into()))?;
    FiniteSumObjective::from_desc(desc)
}

fn start_point(cfg: &ExperimentConfig, obj: &FiniteSumObjective) -> Result<Vec<f64>> {
    let x0 = cfg
        .x0
        .clone()
        .ok_or_else(|| LabError::Config("config has no start point x0".into()))?;
    if x0.len() != obj.d() {
        return Err(LabError::Config(format!(
            "x0 has {} coordinates, objective has d = {}",
            x0.len(),
            obj.d()
        )));
    }
    Ok(x0)
}

/// Constants for the bound and lemma checks: the config's, else the objective's known ones.
fn problem_constants(cfg: &ExperimentConfig, obj: &FiniteSumObjective, x0: &[f64]) -> Option<ProblemConstants> {
    if let Some(pc) = cfg.problem {
        return Some(pc);
    }
    let (l0, l1) = obj.known_l0_l1()?;
    let (d0, d1) = obj.known_d0_d1()?;
    let f_gap = obj.value(x0).ok()? - obj.known_min()?;
    Some(ProblemConstants {
        l0,
        l1,
        d0,
        d1,
        n: obj.n(),
        d: obj.d(),
        f_gap,
    })
}

/// Mean of `‖∇f(w_{k,0})‖` over the last `fraction` of recorded epochs.
pub fn tail_mean_grad(traj: &Trajectory, fraction: f64) -> Option<f64> {
    let s = traj.snapshots();
    if s.is_empty() {
        return None;
    }
    let count = ((s.len() as f64 * fraction).ceil() as usize).clamp(1, s.len());
    let tail = &s[s.len() - count..];
    Some(tail.iter().map(|x| x.grad_norm).sum::<f64>() / count as f64)
}

fn min_grad(traj: &Trajectory) -> Option<f64> {
    traj.snapshots()
        .iter()
        .map(|s| s.grad_norm)
        .reduce(f64::min)
}

fn grad_plot(traj: &Trajectory) -> PlotData {
    PlotData {
        columns: vec!["epoch", "grad_norm"],
        rows: traj
            .boundaries()
            .map(|s| vec![s.epoch as f64, s.grad_norm])
            .collect(),
    }
}

#[derive(Debug, Clone)]
struct AdamJob {
    run_id: String,
    beta1: f64,
    beta2: f64,
    seed: u64,
}

fn adam_jobs(cfg: &ExperimentConfig, prefix: &str) -> Vec<AdamJob> {
    let mut jobs = Vec::new();
    for &beta1 in &cfg.beta1 {
        for &beta2 in &cfg.beta2 {
            for &seed in &cfg.seeds {
                jobs.push(AdamJob {
                    run_id: format!("{prefix}b1={beta1}_b2={beta2}_seed={seed}"),
                    beta1,
                    beta2,
                    seed,
                });
            }
        }
    }
    jobs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    jobs
}

fn adam_params(cfg: &ExperimentConfig, job: &AdamJob, epochs: u64) -> AdamParams {
    let mut p = AdamParams::new(job.beta1, job.beta2, cfg.eta1, cfg.xi, epochs, job.seed)
        .with_stream(stream_id(&job.run_id));
    p.schedule = cfg.schedule;
    p.init_mode = cfg.init_mode;
    if cfg.lemma_checks && job.beta1 * job.beta1 < job.beta2 {
        p = p.with_lemma_checks();
    }
    p
}

/// Runs Adam and fills the summary fields shared by every experiment.
fn adam_outcome(
    cfg: &ExperimentConfig,
    obj: &FiniteSumObjective,
    x0: &[f64],
    job: &AdamJob,
    epochs: u64,
    pc: Option<&ProblemConstants>,
) -> Result<(RunSummary, RunArtifact, Trajectory)> {
    let params = adam_params(cfg, job, epochs);
    let traj = adam_run(obj, x0, &params)?;
    let mut s = RunSummary::new(job.run_id.clone(), Method::RrAdam, cfg.eta1);
    s.seed = Some(job.seed);
    s.beta1 = Some(job.beta1);
    s.beta2 = Some(job.beta2);
    s.status = Some(traj.status);
    s.epochs = traj.completed_epochs();
    s.terminal_grad_norm = tail_mean_grad(&traj, cfg.tail_fraction);
    s.min_grad_norm = min_grad(&traj);
    if let Some(pc) = pc {
        if pc.d1 > 0.0 {
            s.progress_metric = probes::progress_metric(&traj, pc.d0, pc.d1, cfg.xi).ok();
        }
        if cfg.lemma_checks && job.beta1 * job.beta1 < job.beta2 {
            let tc = compute_constants(job.beta1, job.beta2, pc.n, pc.d, cfg.eta1, pc)?;
            s.lemmas.push(check_bounded_update(&traj, &tc, &params)?);
            s.lemmas.push(check_u_gap(&traj, &tc, &params)?);
        }
    }
    let mut smoothness = None;
    if cfg.probe.smoothness {
        let probes = probe_trajectory(obj, &traj, cfg.probe.alpha, cfg.probe.stride)?;
        let pairs: Vec<(f64, f64)> = probes
            .iter()
            .flatten()
            .filter_map(|p| p.smoothness.map(|e| (p.grad_norm, e.estimate)))
            .collect();
        if let Ok(fit) = l0l1_fit(&pairs) {
            s.metrics.insert("L0_hat".into(), fit.l0_hat);
            s.metrics.insert("L1_hat".into(), fit.l1_hat);
            s.metrics.insert("log_log_slope".into(), fit.log_log_slope);
            s.metrics.insert("log_log_r_squared".into(), fit.r_squared);
        }
        smoothness = Some(
            probes
                .iter()
                .map(|p| p.and_then(|p| p.smoothness).map(|e| e.estimate))
                .collect(),
        );
    }
    let artifact = RunArtifact {
        run_id: job.run_id.clone(),
        trajectory: None,
        smoothness,
        plot: grad_plot(&traj),
    };
    Ok((s, artifact, traj))
}

fn keep(cfg: &ExperimentConfig, mut artifact: RunArtifact, traj: Trajectory) -> RunArtifact {
    if cfg.keep_trajectories {
        artifact.trajectory = Some(traj);
    }
    artifact
}

/// RR-Adam on the averaged counterexample across a `β₂` sweep.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect(&[Experiment::Fig3])?;
    cfg.validate()?;
    if cfg.beta2.is_empty() || cfg.beta1.is_empty() {
        return Err(LabError::Config("fig3 needs non-empty beta1 and beta2 sets".into()));
    }
    let obj = objective(cfg)?;
    let x0 = start_point(cfg, &obj)?;
    let pc = problem_constants(cfg, &obj, &x0);
    let jobs = adam_jobs(cfg, "");
    let outcomes = run_all(&jobs, cfg.workers, |job| {
        let (s, a, t) = adam_outcome(cfg, &obj, &x0, job, cfg.horizon, pc.as_ref())?;
        Ok((s, keep(cfg, a, t)))
    })?;

    let mut conclusions = Vec::new();
    let all_ids: Vec<String> = outcomes.iter().map(|o| o.0.run_id.clone()).collect();
    let completed = outcomes.iter().all(|o| o.0.completed());
    conclusions.push(Conclusion::new(
        "runs_completed",
        completed,
        format!("{} runs", outcomes.len()),
        all_ids.clone(),
    ));
    let positive = outcomes
        .iter()
        .all(|o| o.0.terminal_grad_norm.map_or(false, |g| g > 0.0));
    conclusions.push(Conclusion::new(
        "terminal_positive",
        positive,
        "terminal gradient norm > 0 for every run".into(),
        all_ids,
    ));

    // group by (beta1, seed), order by beta2
    let mut groups: BTreeMap<(String, u64), Vec<&RunSummary>> = BTreeMap::new();
    for (s, _) in &outcomes {
        groups
            .entry((format!("{}", s.beta1.unwrap_or(0.0)), s.seed.unwrap_or(0)))
            .or_default()
            .push(s);
    }
    let mut floor_ok = true;
    let mut order_ok = true;
    let mut floor_detail = Vec::new();
    let mut order_detail = Vec::new();
    let mut floor_runs = Vec::new();
    let mut order_runs = Vec::new();
    for ((b1, seed), mut runs) in groups {
        runs.sort_by(|a, b| a.beta2.unwrap().total_cmp(&b.beta2.unwrap()));
        let tails: Vec<f64> = runs
            .iter()
            .map(|r| r.terminal_grad_norm.unwrap_or(f64::NAN))
            .collect();
        let first = tails[0];
        let f_ok = first > cfg.stationarity_floor;
        floor_ok &= f_ok;
        floor_detail.push(format!(
            "b1={b1} seed={seed}: {first:e} at b2={} ({})",
            runs[0].beta2.unwrap(),
            if f_ok { "ok" } else { "below floor" }
        ));
        floor_runs.push(runs[0].run_id.clone());
        let o_ok = tails.windows(2).all(|w| w[1] < w[0]);
        order_ok &= o_ok;
        let listing: Vec<String> = runs
            .iter()
            .zip(&tails)
            .map(|(r, t)| format!("b2={}: {t:e}", r.beta2.unwrap()))
            .collect();
        order_detail.push(format!("b1={b1} seed={seed}: {}", listing.join(" > ")));
        order_runs.extend(runs.iter().map(|r| r.run_id.clone()));
    }
    conclusions.push(Conclusion::new(
        "stationarity_floor",
        floor_ok,
        format!("smallest beta2 stays above {:e}; {}", cfg.stationarity_floor, floor_detail.join("; ")),
        floor_runs,
    ));
    conclusions.push(Conclusion::new(
        "beta2_ordering",
        order_ok,
        order_detail.join("; "),
        order_runs,
    ));
    Ok(ExperimentReport::assemble(cfg.experiment, None, outcomes, conclusions))
}

fn construction(cfg: &ExperimentConfig) -> Result<(FiniteSumObjective, Vec<f64>, Thm2Construction)> {
    let c = cfg.construction;
    let f_bar = c.f_bar.unwrap_or_else(|| Thm2Construction::natural_f_bar(c.l0, c.l1, c.m));
    make_lowerbound(c.l0, c.l1, cfg.horizon, c.m, f_bar)
}

/// Per-step `ln|x_{k+1}| - ln|x_k|` over consecutive finite iterates.
pub fn log_growth(traj: &Trajectory) -> Vec<f64> {
    traj.iterates()
        .windows(2)
        .take_while(|w| w[0][0].is_finite() && w[1][0].is_finite())
        .map(|w| w[1][0].abs().ln() - w[0][0].abs().ln())
        .collect()
}

fn gd_plot(traj: &Trajectory) -> PlotData {
    PlotData {
        columns: vec!["step", "x", "y", "grad_norm"],
        rows: traj
            .boundaries()
            .map(|s| vec![(s.epoch - 1) as f64, s.w_start[0], s.w_start[1], s.grad_norm])
            .collect(),
    }
}

#[derive(Debug, Clone)]
struct GdJob {
    run_id: String,
    factor: f64,
}

fn gd_jobs(cfg: &ExperimentConfig) -> Result<Vec<GdJob>> {
    if cfg.eta_factors.is_empty() {
        return Err(LabError::Config("eta_factors grid is empty".into()));
    }
    if cfg.eta_factors.iter().any(|f| !(*f > 0.0)) {
        return Err(LabError::Config("eta_factors must be positive".into()));
    }
    let mut jobs: Vec<GdJob> = cfg
        .eta_factors
        .iter()
        .map(|&factor| GdJob {
            run_id: format!("gd_eta={factor}x"),
            factor,
        })
        .collect();
    jobs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(jobs)
}

/// One GD run on the lower-bound landscape, summarized for both parts of the
/// dichotomy. Iterates past a blow-up are treated as having unbounded gradient.
fn gd_outcome(
    cfg: &ExperimentConfig,
    obj: &FiniteSumObjective,
    w0: &[f64],
    c: &Thm2Construction,
    job: &GdJob,
    steps: u64,
) -> Result<(RunSummary, RunArtifact)> {
    let eta1 = job.factor * c.eta_star;
    let traj = gd_run(obj, w0, eta1, steps.max(1))?;
    let mut s = RunSummary::new(job.run_id.clone(), Method::Gd, eta1);
    s.eta_factor = Some(job.factor);
    s.status = Some(traj.status);
    s.epochs = traj.completed_epochs();
    s.min_grad_norm = min_grad(&traj);
    let growth = log_growth(&traj);
    s.metrics.insert("growth_steps".into(), growth.len() as f64);
    if let Some(g) = growth.iter().copied().reduce(f64::min) {
        s.metrics.insert("min_log_growth".into(), g);
    }
    s.metrics.insert(
        "diverged".into(),
        if traj.status.is_completed() { 0.0 } else { 1.0 },
    );
    let artifact = RunArtifact {
        run_id: job.run_id.clone(),
        trajectory: None,
        smoothness: None,
        plot: gd_plot(&traj),
    };
    Ok((s, keep(cfg, artifact, traj)))
}

fn floor_holds(s: &RunSummary, epsilon: f64) -> bool {
    s.min_grad_norm.map_or(true, |g| g >= epsilon)
}

/// Gradient descent on the lower-bound landscape at multiples of `η*`.
pub fn run_thm2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect(&[Experiment::Thm2Divergence, Experiment::Thm2Slow])?;
    cfg.validate()?;
    let jobs = gd_jobs(cfg)?;
    let (obj, w0, c) = construction(cfg)?;
    let steps = match cfg.experiment {
        Experiment::Thm2Divergence => cfg.horizon,
        _ => c.slow_horizon,
    };
    let outcomes = run_all(&jobs, cfg.workers, |job| gd_outcome(cfg, &obj, &w0, &c, job, steps))?;
    let ids: Vec<String> = outcomes.iter().map(|o| o.0.run_id.clone()).collect();
    let mut conclusions = Vec::new();
    match cfg.experiment {
        Experiment::Thm2Divergence => {
            let threshold = 0.5 * std::f64::consts::LN_2 - GROWTH_TOL;
            let growth_ok = outcomes
                .iter()
                .all(|o| o.0.metrics.get("min_log_growth").map_or(false, |g| *g >= threshold));
            let detail: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{}: min growth {:.6} over {} steps, {:?}",
                        o.0.run_id,
                        o.0.metrics.get("min_log_growth").copied().unwrap_or(f64::NAN),
                        o.0.metrics["growth_steps"],
                        o.0.status.unwrap()
                    )
                })
                .collect();
            conclusions.push(Conclusion::new("sqrt2_growth", growth_ok, detail.join("; "), ids.clone()));
            let diverged = outcomes.iter().all(|o| !o.0.completed());
            conclusions.push(Conclusion::new(
                "diverged",
                diverged,
                format!("every run stops at the overflow guard within {steps} steps"),
                ids.clone(),
            ));
            let observed = outcomes
                .iter()
                .all(|o| o.0.metrics["growth_steps"] as usize >= cfg.min_growth_steps);
            conclusions.push(Conclusion::new(
                "growth_steps_observed",
                observed,
                format!("at least {} finite growth steps before the guard", cfg.min_growth_steps),
                ids,
            ));
        }
        _ => {
            let ok = outcomes.iter().all(|o| floor_holds(&o.0, c.epsilon));
            let detail: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{}: min grad {:e} ({:?})",
                        o.0.run_id,
                        o.0.min_grad_norm.unwrap_or(f64::NAN),
                        o.0.status.unwrap()
                    )
                })
                .collect();
            conclusions.push(Conclusion::new(
                "gradient_floor",
                ok,
                format!("eps = {:e} for k < {}; {}", c.epsilon, c.slow_horizon, detail.join("; ")),
                ids,
            ));
            conclusions.push(Conclusion::new(
                "slow_horizon",
                c.slow_horizon >= cfg.min_slow_horizon,
                format!("slow_horizon = {} (T = {})", c.slow_horizon, c.horizon),
                Vec::new(),
            ));
        }
    }
    Ok(ExperimentReport::assemble(cfg.experiment, Some(c), outcomes, conclusions))
}

/// GD over a step-size grid against RR-Adam on the lower-bound landscape.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect(&[Experiment::AdamVsGd])?;
    cfg.validate()?;
    if cfg.budget == 0 {
        return Err(LabError::Config("Adam epoch budget must be positive".into()));
    }
    let gd = gd_jobs(cfg)?;
    let (obj, w0, c) = construction(cfg)?;
    let obj = Arc::new(obj);
    let (_, d1) = obj.known_d0_d1().expect("lower-bound landscape knows its noise constants");

    let mut outcomes = run_all(&gd, cfg.workers, |job| {
        gd_outcome(cfg, &obj, &w0, &c, job, c.slow_horizon)
    })?;
    let gd_ids: Vec<String> = outcomes.iter().map(|o| o.0.run_id.clone()).collect();
    let dichotomy = outcomes
        .iter()
        .all(|o| !o.0.completed() || floor_holds(&o.0, c.epsilon));
    let table: Vec<String> = outcomes
        .iter()
        .map(|o| {
            format!(
                "{}: {}",
                o.0.run_id,
                if !o.0.completed() { "diverged" } else if floor_holds(&o.0, c.epsilon) { "floor holds" } else { "crossed" }
            )
        })
        .collect();

    let jobs = adam_jobs(cfg, "adam_");
    let adam = run_all(&jobs, cfg.workers, |job| {
        let gamma = gamma_threshold(d1, obj.n(), obj.d(), job.beta1)?;
        if job.beta2 <= gamma || job.beta1 * job.beta1 >= job.beta2 {
            return Ok(skipped_adam(
                job,
                cfg.eta1,
                format!("beta2 = {} is not above gamma = {gamma}", job.beta2),
            ));
        }
        let (mut s, a, t) = adam_outcome(cfg, &obj, &w0, job, cfg.budget, None)?;
        s.metrics.insert("gamma".into(), gamma);
        if let Some(k) = t.boundaries().find(|b| b.grad_norm < c.epsilon) {
            s.metrics.insert("first_crossing_epoch".into(), k.epoch as f64);
        }
        Ok((s, keep(cfg, a, t)))
    })?;
    let admissible: Vec<&RunSummary> = adam.iter().map(|o| &o.0).filter(|s| s.skipped.is_none()).collect();
    let crossed = !admissible.is_empty()
        && admissible
            .iter()
            .all(|s| s.metrics.contains_key("first_crossing_epoch"));
    let crossing: Vec<String> = admissible
        .iter()
        .map(|s| match s.metrics.get("first_crossing_epoch") {
            Some(k) => format!("{}: epoch {k}", s.run_id),
            None => format!("{}: none within {}", s.run_id, cfg.budget),
        })
        .collect();
    let adam_ids = admissible.iter().map(|s| s.run_id.clone()).collect();

    let conclusions = vec![
        Conclusion::new("gd_dichotomy", dichotomy, table.join("; "), gd_ids),
        Conclusion::new(
            "adam_first_crossing",
            crossed,
            format!("budget {} epochs, eps = {:e}; {}", cfg.budget, c.epsilon, crossing.join("; ")),
            adam_ids,
        ),
    ];
    outcomes.extend(adam);
    Ok(ExperimentReport::assemble(cfg.experiment, Some(c), outcomes, conclusions))
}

fn skipped_adam(job: &AdamJob, eta1: f64, reason: String) -> (RunSummary, RunArtifact) {
    let mut s = RunSummary::new(job.run_id.clone(), Method::RrAdam, eta1);
    s.seed = Some(job.seed);
    s.beta1 = Some(job.beta1);
    s.beta2 = Some(job.beta2);
    s.skipped = Some(reason);
    let plot = PlotData {
        columns: vec!["epoch", "grad_norm"],
        rows: Vec::new(),
    };
    (
        s,
        RunArtifact {
            run_id: job.run_id.clone(),
            trajectory: None,
            smoothness: None,
            plot,
        },
    )
}

/// Bounded-update and u-gap checks over a `(β₁, β₂)` grid with the theory initialization.
pub fn run_lemma_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect(&[Experiment::LemmaSuite])?;
    cfg.validate()?;
    let obj = objective(cfg)?;
    let x0 = start_point(cfg, &obj)?;
    let pc = problem_constants(cfg, &obj, &x0).ok_or_else(|| {
        LabError::Config("lemma suite needs problem constants (config `problem` or a known objective)".into())
    })?;
    let mut lemma_cfg = cfg.clone();
    lemma_cfg.lemma_checks = true;
    lemma_cfg.init_mode = crate::optimizers::InitMode::PaperTheory;
    let jobs = adam_jobs(&lemma_cfg, "");
    let outcomes = run_all(&jobs, cfg.workers, |job| {
        if job.beta1 * job.beta1 >= job.beta2 {
            return Ok(skipped_adam(
                job,
                cfg.eta1,
                format!("beta1^2 = {} >= beta2 = {}", job.beta1 * job.beta1, job.beta2),
            ));
        }
        let (mut s, a, t) = adam_outcome(&lemma_cfg, &obj, &x0, job, cfg.horizon, Some(&pc))?;
        if let Some(r) = s.lemmas.first() {
            s.metrics.insert("max_c1_ratio".into(), r.max_observed);
            s.metrics.insert("c1".into(), r.bound);
        }
        Ok((s, keep(cfg, a, t)))
    })?;
    let checked: Vec<&RunSummary> = outcomes.iter().map(|o| &o.0).filter(|s| s.skipped.is_none()).collect();
    let clean = !checked.is_empty() && checked.iter().all(|s| s.lemmas.iter().all(|l| l.holds()));
    let total: u64 = checked
        .iter()
        .flat_map(|s| s.lemmas.iter())
        .map(|l| l.violation_count)
        .sum();
    let checks: u64 = checked.iter().flat_map(|s| s.lemmas.iter()).map(|l| l.checks).sum();
    let conclusions = vec![Conclusion::new(
        "zero_violations",
        clean,
        format!("{total} violations in {checks} checks over {} runs", checked.len()),
        checked.iter().map(|s| s.run_id.clone()).collect(),
    )];
    Ok(ExperimentReport::assemble(cfg.experiment, None, outcomes, conclusions))
}

/// RR-Adam on an arbitrary objective from the config, with optional bound,
/// lemma and smoothness diagnostics.
pub fn run_custom(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.expect(&[Experiment::Custom])?;
    cfg.validate()?;
    let obj = objective(cfg)?;
    let x0 = start_point(cfg, &obj)?;
    let pc = problem_constants(cfg, &obj, &x0);
    let jobs = adam_jobs(cfg, "");
    let outcomes = run_all(&jobs, cfg.workers, |job| {
        if job.beta1 * job.beta1 >= job.beta2 && cfg.lemma_checks {
            return Ok(skipped_adam(job, cfg.eta1, "beta1^2 >= beta2 with lemma checks on".into()));
        }
        let (mut s, a, t) = adam_outcome(cfg, &obj, &x0, job, cfg.horizon, pc.as_ref())?;
        if let Some(pc) = &pc {
            if pc.d1 > 0.0 && job.beta1 * job.beta1 < job.beta2 && t.status.is_completed() {
                let params = adam_params(cfg, job, cfg.horizon);
                s.bound = Some(check_theorem1(&t, pc, &params)?);
            }
        }
        Ok((s, keep(cfg, a, t)))
    })?;
    let ids: Vec<String> = outcomes.iter().map(|o| o.0.run_id.clone()).collect();
    let mut conclusions = vec![Conclusion::new(
        "runs_completed",
        outcomes.iter().all(|o| o.0.skipped.is_some() || o.0.completed()),
        format!("{} runs", outcomes.len()),
        ids,
    )];
    let bounded: Vec<&RunSummary> = outcomes.iter().map(|o| &o.0).filter(|s| s.bound.is_some()).collect();
    if !bounded.is_empty() {
        conclusions.push(Conclusion::new(
            "bound_not_violated",
            bounded
                .iter()
                .all(|s| s.bound.as_ref().unwrap().verdict != BoundVerdict::Violated),
            bounded
                .iter()
                .map(|s| format!("{}: {:?}", s.run_id, s.bound.as_ref().unwrap().verdict))
                .collect::<Vec<_>>()
                .join("; "),
            bounded.iter().map(|s| s.run_id.clone()).collect(),
        ));
    }
    let checked: Vec<&RunSummary> = outcomes.iter().map(|o| &o.0).filter(|s| !s.lemmas.is_empty()).collect();
    if !checked.is_empty() {
        conclusions.push(Conclusion::new(
            "zero_violations",
            checked.iter().all(|s| s.lemmas.iter().all(|l| l.holds())),
            format!("{} runs checked", checked.len()),
            checked.iter().map(|s| s.run_id.clone()).collect(),
        ));
    }
    Ok(ExperimentReport::assemble(cfg.experiment, None, outcomes, conclusions))
}

/// Dispatches on `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.experiment {
        Experiment::Fig3 => run_fig3(cfg),
        Experiment::Thm2Divergence | Experiment::Thm2Slow => run_thm2(cfg),
        Experiment::AdamVsGd => run_comparison(cfg),
        Experiment::LemmaSuite => run_lemma_suite(cfg),
        Experiment::Custom => run_custom(cfg),
    }
}
