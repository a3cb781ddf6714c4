use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::{ExperimentConfig, Problem};
use super::runlog::{csv_writer, format_float, format_significant, write_preamble, write_run_log};
use crate::estimators::{error_bound, variance_bound, EstimatorKind};
use crate::policy::SmoothingConstants;
use crate::rng::StreamFactory;
use crate::safe::{lipschitz_constant, MetaParams, SpgRun};
use crate::{Result, SpgError};

pub const RUN_LOG_NAME: &str = "run.csv";
pub const SWEEP_SUMMARY_NAME: &str = "sweep_summary.csv";

/// Constants derived from a configuration for one estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub smoothing: SmoothingConstants,
    pub lipschitz: f64,
    pub estimator: EstimatorKind,
    pub nu_squared: f64,
    pub delta: f64,
    pub eps_delta: f64,
}

pub fn derived_constants(problem: &Problem, estimator: EstimatorKind, delta: f64) -> Result<DerivedConstants> {
    let smoothing = problem.smoothing_constants();
    let spec = problem.spec();
    let vb = variance_bound(estimator, spec, smoothing.kappa)?;
    let err = error_bound(vb, delta)?;
    Ok(DerivedConstants {
        smoothing,
        lipschitz: lipschitz_constant(&smoothing, spec).value(),
        estimator,
        nu_squared: vb.nu_squared,
        delta,
        eps_delta: err.eps_delta,
    })
}

/// Comment lines heading a run log: config echo and derived constants.
/// The echo leaves out the output directory, so a log depends only on the
/// experiment and not on where it is written.
pub fn run_preamble(cfg: &ExperimentConfig, derived: &DerivedConstants, run: &SpgRun, schedule: &str) -> Result<Vec<String>> {
    let echo = ExperimentConfig { output: Default::default(), ..cfg.clone() };
    let mut lines = vec![
        "spg run log".to_string(),
        format!("schedule = {schedule}"),
        "delta is a per-update failure probability; no union bound is taken across updates".to_string(),
        format!("certified = {}", run.certified),
        format!("budget_exhausted = {}", run.budget_exhausted),
        String::new(),
        "[config]".to_string(),
        echo.to_toml()?,
        String::new(),
        "[derived]".to_string(),
    ];
    let sc = derived.smoothing;
    for (name, value) in [
        ("psi", sc.psi),
        ("kappa", sc.kappa),
        ("xi", sc.xi),
        ("lipschitz", derived.lipschitz),
        ("nu_squared", derived.nu_squared),
        ("eps_delta", derived.eps_delta),
    ] {
        lines.push(format!("{name} = {}", format_float(value)));
    }
    lines.push(format!("estimator = {}", derived.estimator));
    lines.push(String::new());
    Ok(lines)
}

fn render_run_log(cfg: &ExperimentConfig, derived: &DerivedConstants, run: &SpgRun, schedule: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_run_log(&mut buf, &run_preamble(cfg, derived, run, schedule)?, &run.records)?;
    Ok(buf)
}

/// Runs safe policy gradient and writes `run.csv` under `out_dir`.
pub fn cmd_run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let problem = cfg.build()?;
    let derived = derived_constants(&problem, cfg.estimator.kind, cfg.safety.delta)?;
    let run = problem.spg(&cfg.settings(), &StreamFactory::new(cfg.seed))?;
    let bytes = render_run_log(cfg, &derived, &run, "spg")?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(RUN_LOG_NAME);
    fs::write(&path, bytes)?;
    Ok(path)
}

/// Table-1 and Table-2 style constants for a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsTable {
    pub rows: Vec<(String, f64)>,
}

impl ConstantsTable {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.rows.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Two aligned columns, values to 6 significant digits.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("quantity".len());
        let mut out = format!("{:<width$}  value\n", "quantity");
        for (name, value) in &self.rows {
            out.push_str(&format!("{name:<width$}  {}\n", format_significant(*value, 6)));
        }
        out
    }
}

pub fn cmd_constants(cfg: &ExperimentConfig) -> Result<ConstantsTable> {
    cfg.validate()?;
    let problem = cfg.build()?;
    let delta = cfg.safety.delta;
    let reinforce = derived_constants(&problem, EstimatorKind::Reinforce, delta)?;
    let gpomdp = derived_constants(&problem, EstimatorKind::Gpomdp, delta)?;
    let sc = reinforce.smoothing;
    let rows = [
        ("psi", sc.psi),
        ("kappa", sc.kappa),
        ("xi", sc.xi),
        ("lipschitz", reinforce.lipschitz),
        ("nu2_reinforce", reinforce.nu_squared),
        ("nu2_gpomdp", gpomdp.nu_squared),
        ("delta", delta),
        ("eps_delta_reinforce", reinforce.eps_delta),
        ("eps_delta_gpomdp", gpomdp.eps_delta),
    ];
    Ok(ConstantsTable { rows: rows.into_iter().map(|(n, v)| (n.to_string(), v)).collect() })
}

/// Step size of a fixed schedule, absolute or as a multiple of `1/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Absolute(f64),
    OverLipschitz(f64),
}

impl StepSpec {
    pub fn resolve(self, lipschitz: f64) -> f64 {
        match self {
            StepSpec::Absolute(a) => a,
            StepSpec::OverLipschitz(c) => c / lipschitz,
        }
    }
}

/// `spg`, or `fixed:<alpha>:<N>` where `<alpha>` is a number or `<c>/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Spg,
    Fixed { step: StepSpec, batch_size: usize },
}

impl Schedule {
    fn slug(&self) -> &'static str {
        match self {
            Schedule::Spg => "spg",
            Schedule::Fixed { .. } => "fixed",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Spg => f.write_str("spg"),
            Schedule::Fixed { step: StepSpec::Absolute(a), batch_size } => write!(f, "fixed:{a}:{batch_size}"),
            Schedule::Fixed { step: StepSpec::OverLipschitz(c), batch_size } => write!(f, "fixed:{c}/L:{batch_size}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = SpgError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "spg" {
            return Ok(Schedule::Spg);
        }
        let bad = || SpgError::config(format!("schedule {s:?} is not \"spg\" or \"fixed:<alpha>:<N>\""));
        let mut parts = s.split(':');
        if parts.next() != Some("fixed") {
            return Err(bad());
        }
        let (Some(alpha), Some(n), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let step = match alpha.strip_suffix("/L") {
            Some(c) => StepSpec::OverLipschitz(c.parse().map_err(|_| bad())?),
            None => StepSpec::Absolute(alpha.parse().map_err(|_| bad())?),
        };
        let value = match step {
            StepSpec::Absolute(v) | StepSpec::OverLipschitz(v) => v,
        };
        if !(value >= 0.0 && value.is_finite()) {
            return Err(SpgError::config(format!("schedule {s:?}: step size must be finite and non-negative")));
        }
        let batch_size: usize = n.parse().map_err(|_| bad())?;
        if batch_size == 0 {
            return Err(SpgError::config(format!("schedule {s:?}: batch size must be at least 1")));
        }
        Ok(Schedule::Fixed { step, batch_size })
    }
}

/// One summary row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub schedule: String,
    pub file: String,
    pub final_j_hat: f64,
    /// Exact `J` of the final parameters, when an oracle exists.
    pub final_j: Option<f64>,
    pub total_trajectories: usize,
    /// Iterations whose batch-mean return fell below the previous one.
    pub empirical_drops: usize,
    /// Updates that lowered exact `J`, when an oracle exists.
    pub oracle_drops: Option<usize>,
    pub stalled_iterations: usize,
}

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "schedule",
    "file",
    "final_J_hat",
    "final_J",
    "total_trajectories",
    "empirical_drops",
    "oracle_drops",
    "stalled_iterations",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub runs: Vec<PathBuf>,
    pub summary: PathBuf,
    pub rows: Vec<SweepRow>,
}

fn summarize(problem: &Problem, schedule: &Schedule, file: String, run: &SpgRun) -> Result<SweepRow> {
    let records = &run.records;
    let empirical_drops = records.windows(2).filter(|w| w[1].j_hat < w[0].j_hat).count();
    let exact: Option<Vec<f64>> = run.thetas.iter().map(|t| problem.exact_performance(t)).collect::<Option<Result<Vec<f64>>>>().transpose()?;
    Ok(SweepRow {
        schedule: schedule.to_string(),
        file,
        final_j_hat: records.last().map_or(f64::NAN, |r| r.j_hat),
        final_j: exact.as_ref().and_then(|j| j.last().copied()),
        total_trajectories: records.last().map_or(0, |r| r.cumulative_trajectories),
        empirical_drops,
        oracle_drops: exact.map(|j| j.windows(2).filter(|w| w[1] < w[0] - 1e-12).count()),
        stalled_iterations: records.iter().filter(|r| r.stalled).count(),
    })
}

/// Runs every schedule from the same seed, writing one log per schedule
/// and a summary.
pub fn cmd_sweep(cfg: &ExperimentConfig, schedules: &[Schedule], out_dir: &Path) -> Result<SweepOutput> {
    if schedules.is_empty() {
        return Err(SpgError::config("sweep needs at least one schedule"));
    }
    cfg.validate()?;
    let problem = cfg.build()?;
    let derived = derived_constants(&problem, cfg.estimator.kind, cfg.safety.delta)?;
    let settings = cfg.settings();

    let mut logs = Vec::with_capacity(schedules.len());
    let mut rows = Vec::with_capacity(schedules.len());
    for (i, schedule) in schedules.iter().enumerate() {
        let streams = StreamFactory::new(cfg.seed);
        let run = match *schedule {
            Schedule::Spg => problem.spg(&settings, &streams)?,
            Schedule::Fixed { step, batch_size } => {
                let meta = MetaParams { alpha: step.resolve(derived.lipschitz), batch_size };
                problem.fixed(meta, &settings, &streams)?
            }
        };
        let file = format!("sweep_{i}_{}.csv", schedule.slug());
        rows.push(summarize(&problem, schedule, file.clone(), &run)?);
        logs.push((file, render_run_log(cfg, &derived, &run, &schedule.to_string())?));
    }

    let mut summary = Vec::new();
    write_preamble(&mut summary, &["spg sweep summary".to_string(), format!("seed = {}", cfg.seed)])?;
    {
        let mut w = csv_writer(&mut summary);
        w.write_record(SUMMARY_COLUMNS)?;
        for r in &rows {
            w.write_record([
                r.schedule.clone(),
                r.file.clone(),
                format_float(r.final_j_hat),
                r.final_j.map(format_float).unwrap_or_default(),
                r.total_trajectories.to_string(),
                r.empirical_drops.to_string(),
                r.oracle_drops.map(|d| d.to_string()).unwrap_or_default(),
                r.stalled_iterations.to_string(),
            ])?;
        }
        w.flush()?;
    }

    fs::create_dir_all(out_dir)?;
    let mut runs = Vec::with_capacity(logs.len());
    for (file, bytes) in logs {
        let path = out_dir.join(file);
        fs::write(&path, bytes)?;
        runs.push(path);
    }
    let summary_path = out_dir.join(SWEEP_SUMMARY_NAME);
    fs::write(&summary_path, summary)?;
    Ok(SweepOutput { runs, summary: summary_path, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_schedules() {
        assert_eq!("spg".parse::<Schedule>().unwrap(), Schedule::Spg);
        assert_eq!(
            "fixed:1/L:10".parse::<Schedule>().unwrap(),
            Schedule::Fixed { step: StepSpec::OverLipschitz(1.0), batch_size: 10 }
        );
        assert_eq!(
            "fixed:0.05:3".parse::<Schedule>().unwrap(),
            Schedule::Fixed { step: StepSpec::Absolute(0.05), batch_size: 3 }
        );
        for bad in ["", "fixed", "fixed:1:0", "fixed:-1:2", "fixed:x/L:2", "fixed:1:2:3", "sgd"] {
            assert!(matches!(bad.parse::<Schedule>(), Err(SpgError::Config(_))), "{bad}");
        }
        let s: Schedule = "fixed:10/L:25".parse().unwrap();
        assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
    }

    #[test]
    fn step_spec_resolves() {
        assert_eq!(StepSpec::OverLipschitz(2.0).resolve(8.0), 0.25);
        assert_eq!(StepSpec::Absolute(0.3).resolve(8.0), 0.3);
    }
}
