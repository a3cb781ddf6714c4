//! Configuration, CSV logging and the `run`, `constants`, `validate` and
//! `sweep` commands.

mod commands;
pub mod config;
pub mod runlog;
pub mod validate;

pub use commands::{
    cmd_constants, cmd_run, cmd_sweep, derived_constants, run_preamble, ConstantsTable, DerivedConstants, Schedule,
    StepSpec, SweepOutput, SweepRow, RUN_LOG_NAME, SUMMARY_COLUMNS, SWEEP_SUMMARY_NAME,
};
pub use config::{ExperimentConfig, Problem};
pub use runlog::{format_float, format_significant, read_run_log, write_run_log, RUN_COLUMNS};
pub use validate::{cmd_validate, CheckOutcome, CheckResult, ValidateOptions, ValidateReport};

use crate::mdp::{Environment, MdpSpec};
use crate::oracle::exact_performance;
use crate::policy::{Policy, PolicyParams, SmoothingConstants};
use crate::rng::StreamFactory;
use crate::safe::{fixed_schedule_run, spg_run, MetaParams, SpgRun, SpgSettings};
use crate::{Result, SpgError};

/// Process exit codes of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ValidationFailed = 1,
    ConfigError = 2,
    RunError = 3,
    IoError = 4,
    Skipped = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&SpgError> for ExitStatus {
    fn from(err: &SpgError) -> Self {
        match err {
            SpgError::Config(_) => ExitStatus::ConfigError,
            SpgError::Io(_) | SpgError::Csv(_) => ExitStatus::IoError,
            _ => ExitStatus::RunError,
        }
    }
}

impl Problem {
    pub fn spec(&self) -> &MdpSpec {
        match self {
            Problem::Finite { mdp, .. } => mdp.spec(),
            Problem::Lqg { env, .. } => env.spec(),
        }
    }

    pub fn smoothing_constants(&self) -> SmoothingConstants {
        match self {
            Problem::Finite { policy, .. } => policy.smoothing_constants(),
            Problem::Lqg { policy, .. } => policy.smoothing_constants(),
        }
    }

    pub fn theta0(&self) -> &PolicyParams {
        match self {
            Problem::Finite { theta0, .. } | Problem::Lqg { theta0, .. } => theta0,
        }
    }

    pub fn spg(&self, settings: &SpgSettings, streams: &StreamFactory) -> Result<SpgRun> {
        match self {
            Problem::Finite { mdp, policy, theta0 } => spg_run(mdp, policy, theta0, settings, streams),
            Problem::Lqg { env, policy, theta0 } => spg_run(env, policy, theta0, settings, streams),
        }
    }

    pub fn fixed(&self, meta: MetaParams, settings: &SpgSettings, streams: &StreamFactory) -> Result<SpgRun> {
        match self {
            Problem::Finite { mdp, policy, theta0 } => fixed_schedule_run(mdp, policy, theta0, meta, settings, streams),
            Problem::Lqg { env, policy, theta0 } => fixed_schedule_run(env, policy, theta0, meta, settings, streams),
        }
    }

    /// Exact `J(theta)` where an oracle exists (finite MDPs only).
    pub fn exact_performance(&self, theta: &PolicyParams) -> Option<Result<f64>> {
        match self {
            Problem::Finite { mdp, policy, .. } => Some(exact_performance(mdp, policy, theta)),
            Problem::Lqg { .. } => None,
        }
    }
}
