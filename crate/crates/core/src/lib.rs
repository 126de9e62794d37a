//! Random-reshuffling Adam on finite-sum objectives: test landscapes, the
//! optimizer and its step-size baselines, the closed-form convergence
//! constants, trajectory probes, and an experiment harness.

pub mod error;
pub mod harness;
pub mod landscapes;
pub mod optimizers;
pub mod probes;
pub mod theory;

pub use error::{LabError, Result};
pub use landscapes::{FiniteSumObjective, LowerBoundParams};
pub use optimizers::{adam_run, clipped_gd_run, gd_run, AdamParams, InitMode, Schedule, Trajectory};
