//! Named reproductions, parameter sweeps and report emission.

pub mod config;
pub mod emit;
pub mod experiments;

pub use config::{ConstructionConfig, Experiment, ExperimentConfig, ProbeConfig};
pub use emit::{emit, report_json, runs_csv, Format};
pub use experiments::{
    log_growth, run_comparison, run_custom, run_experiment, run_fig3, run_lemma_suite, run_thm2,
    tail_mean_grad, Conclusion, Environment, ExperimentReport, RunSummary,
};
