use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::landscapes::{ObjectiveDesc, DescKind, DescParameters};
use crate::optimizers::{InitMode, Schedule};
use crate::probes::DEFAULT_ALPHA;
use crate::theory::ProblemConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig3,
    Thm2Divergence,
    Thm2Slow,
    AdamVsGd,
    LemmaSuite,
    Custom,
}

impl Experiment {
    /// Directory name under the output root, also the CLI subcommand.
    pub fn slug(&self) -> &'static str {
        match self {
            Experiment::Fig3 => "fig3",
            Experiment::Thm2Divergence => "thm2-diverge",
            Experiment::Thm2Slow => "thm2-slow",
            Experiment::AdamVsGd => "compare",
            Experiment::LemmaSuite => "lemmas",
            Experiment::Custom => "custom",
        }
    }
}

/// Lower-bound landscape construction inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionConfig {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Defaults to the gap implied by `M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_bar: Option<f64>,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            l0: 1.0,
            l1: 1.0,
            m: 100.0,
            f_bar: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Estimate local smoothness along every `stride`-th step.
    pub smoothness: bool,
    pub alpha: f64,
    pub stride: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            smoothness: false,
            alpha: DEFAULT_ALPHA,
            stride: 1,
        }
    }
}

/// One experiment invocation. Absent fields take the experiment's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub eta1: f64,
    pub xi: f64,
    pub schedule: Schedule,
    pub init_mode: InitMode,
    pub seeds: Vec<u64>,
    /// Epochs for Adam runs; `T` of the lower-bound construction for the GD experiments.
    pub horizon: u64,
    #[serde(default)]
    pub construction: ConstructionConfig,
    /// Multiples of `η*` used as GD step sizes.
    #[serde(default)]
    pub eta_factors: Vec<f64>,
    /// Epoch budget for the Adam first-crossing in the comparison.
    #[serde(default)]
    pub budget: u64,
    /// Constants for the Adam bound check of custom runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConstants>,
    #[serde(default)]
    pub lemma_checks: bool,
    #[serde(default)]
    pub probe: ProbeConfig,
    /// Fraction of final epochs averaged for the terminal gradient statistic.
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    /// Lower limit on the terminal gradient of the smallest `β₂` (Fig3).
    #[serde(default = "default_floor")]
    pub stationarity_floor: f64,
    /// Minimum number of growth steps the divergence check must observe.
    #[serde(default = "default_growth_steps")]
    pub min_growth_steps: usize,
    /// Minimum acceptable `slow_horizon`.
    #[serde(default = "default_slow_horizon")]
    pub min_slow_horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Keep per-step trajectories in the report for emission.
    #[serde(default = "default_true")]
    pub keep_trajectories: bool,
}

fn default_tail() -> f64 {
    0.1
}
fn default_floor() -> f64 {
    1e-4
}
fn default_growth_steps() -> usize {
    10
}
fn default_slow_horizon() -> u64 {
    100
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    fn base(experiment: Experiment) -> Self {
        Self {
            experiment,
            objective: None,
            x0: None,
            beta1: vec![0.9],
            beta2: vec![0.999],
            eta1: 0.1,
            xi: 1e-8,
            schedule: Schedule::Diminishing,
            init_mode: InitMode::PaperTheory,
            seeds: vec![1],
            horizon: 1000,
            construction: ConstructionConfig::default(),
            eta_factors: Vec::new(),
            budget: 0,
            problem: None,
            lemma_checks: false,
            probe: ProbeConfig::default(),
            tail_fraction: default_tail(),
            stationarity_floor: default_floor(),
            min_growth_steps: default_growth_steps(),
            min_slow_horizon: default_slow_horizon(),
            out_dir: None,
            workers: None,
            keep_trajectories: true,
        }
    }

    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self::base(experiment);
        match experiment {
            Experiment::Fig3 => {
                c.objective = Some(zhang_desc());
                c.x0 = Some(vec![-2.0]);
                c.beta2 = vec![0.9, 0.99, 0.999];
                c.seeds = vec![1, 2, 3];
                c.horizon = 10_000;
            }
            Experiment::Thm2Divergence => {
                c.horizon = 10_000;
                c.eta_factors = vec![1.0, 1.05, 2.0];
            }
            Experiment::Thm2Slow => {
                c.horizon = 10_000;
                c.eta_factors = vec![0.1, 0.5, 0.99];
            }
            Experiment::AdamVsGd => {
                c.horizon = 10_000;
                c.eta1 = 1.0;
                c.eta_factors = vec![0.125, 0.25, 0.5, 1.0, 2.0, 4.0];
                c.budget = 2000;
            }
            Experiment::LemmaSuite => {
                c.objective = Some(zhang_desc());
                c.x0 = Some(vec![-2.0]);
                c.beta1 = vec![0.0, 0.5, 0.9];
                c.beta2 = vec![0.99, 0.999];
                c.seeds = vec![1, 2, 3, 4, 5];
                c.horizon = 1000;
                c.lemma_checks = true;
            }
            Experiment::Custom => {}
        }
        c
    }

    /// Parses a config, filling absent top-level fields from
    /// [`ExperimentConfig::defaults`] of the named experiment.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg_err = |e: serde_json::Error| LabError::Config(e.to_string());
        let user: serde_json::Value = serde_json::from_str(text).map_err(cfg_err)?;
        let obj = user
            .as_object()
            .ok_or_else(|| LabError::Config("config must be a JSON object".into()))?;
        let experiment: Experiment = serde_json::from_value(
            obj.get("experiment")
                .cloned()
                .ok_or_else(|| LabError::Config("missing field `experiment`".into()))?,
        )
        .map_err(cfg_err)?;
        let mut merged = serde_json::to_value(Self::defaults(experiment))?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in obj {
            target.insert(k.clone(), v.clone());
        }
        let c: Self = serde_json::from_value(merged).map_err(cfg_err)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&serde_json::to_value(self)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seed list has duplicates".into());
        }
        for (name, grid) in [("beta1", &self.beta1), ("beta2", &self.beta2), ("eta_factors", &self.eta_factors)] {
            let mut g = grid.clone();
            g.sort_by(f64::total_cmp);
            g.dedup();
            if g.len() != grid.len() {
                return bad(format!("{name} grid has duplicates"));
            }
            if grid.iter().any(|v| !v.is_finite()) {
                return bad(format!("{name} grid has a non-finite value"));
            }
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad(format!("tail_fraction must lie in (0, 1], got {}", self.tail_fraction));
        }
        if !(self.eta1 > 0.0 && self.eta1.is_finite()) {
            return bad(format!("eta1 must be positive, got {}", self.eta1));
        }
        if !(self.xi >= 0.0) {
            return bad(format!("xi must be nonnegative, got {}", self.xi));
        }
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }

    pub(crate) fn expect(&self, allowed: &[Experiment]) -> Result<()> {
        if allowed.contains(&self.experiment) {
            Ok(())
        } else {
            Err(LabError::Config(format!(
                "config is for {:?}, expected one of {:?}",
                self.experiment, allowed
            )))
        }
    }
}

fn zhang_desc() -> ObjectiveDesc {
    ObjectiveDesc {
        kind: DescKind::ZhangCounterexample,
        n: 10,
        d: 1,
        parameters: DescParameters::default(),
    }
}
