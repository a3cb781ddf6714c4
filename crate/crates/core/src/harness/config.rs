//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! iterations = 5
//!
//! [environment]
//! kind = "chain"
//! n = 3
//!
//! [policy]
//! kind = "softmax"
//! tau = 1.0
//! feature_bound = 1.0
//!
//! [safety]
//! delta = 0.2
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::estimators::{BaselineKind, EstimatorKind};
use crate::mdp::{make_bandit, make_chain, make_lqg1d, ChainConfig, EnumerableMdp, Lqg1d, Lqg1dConfig};
use crate::policy::{FeatureTable, GaussianPolicy, Polynomial, PolicyParams, SoftmaxPolicy};
use crate::safe::{SpgLimits, SpgSettings};
use crate::{DVector, Result, SpgError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "seed_format")]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    pub environment: EnvironmentConfig,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub safety: SafetyConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default, skip_serializing_if = "OutputConfig::is_default")]
    pub output: OutputConfig,
}

fn default_iterations() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvironmentConfig {
    Chain(ChainConfig),
    Bandit(BanditConfig),
    Lqg1d(Lqg1dConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditConfig {
    pub rewards: Vec<f64>,
    #[serde(default = "default_bandit_gamma")]
    pub gamma: f64,
}

fn default_bandit_gamma() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PolicyConfig {
    Softmax(SoftmaxConfig),
    Gaussian(GaussianConfig),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftmaxFeatures {
    /// One-hot over `(state, action)`.
    #[default]
    Tabular,
    /// Explicit `table[s][a]` vectors.
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftmaxConfig {
    pub tau: f64,
    pub feature_bound: f64,
    #[serde(default)]
    pub features: SoftmaxFeatures,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussianFeatures {
    /// `[(s/scale), ..., (s/scale)^degree]`.
    #[default]
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianConfig {
    pub sigma: f64,
    pub feature_bound: f64,
    #[serde(default)]
    pub features: GaussianFeatures,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
}

fn default_degree() -> usize {
    1
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub baseline: BaselineKind,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { kind: EstimatorKind::Gpomdp, baseline: BaselineKind::Zero }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyConfig {
    /// Per-update failure probability.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsConfig {
    pub max_trajectories_per_iteration: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_total_trajectories: Option<usize>,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self { max_trajectories_per_iteration: SpgLimits::default().max_trajectories_per_iteration, max_total_trajectories: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("spg-out") }
    }
}

impl OutputConfig {
    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// TOML integers are signed, so seeds above `i64::MAX` round-trip as strings.
mod seed_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(|_| de::Error::custom("seed must be non-negative")),
            Raw::Text(t) => t.trim().parse().map_err(|_| de::Error::custom(format!("seed {t:?} is not a u64"))),
        }
    }
}

/// A validated environment/policy pair ready to run.
#[derive(Debug, Clone)]
pub enum Problem {
    Finite { mdp: EnumerableMdp, policy: SoftmaxPolicy<FeatureTable>, theta0: PolicyParams },
    Lqg { env: Lqg1d, policy: GaussianPolicy<Polynomial>, theta0: PolicyParams },
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| SpgError::config(e.to_string().trim_end().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            SpgError::Config(msg) => SpgError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SpgError::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let delta = self.safety.delta;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SpgError::config(format!("safety.delta must lie in (0, 1), got {delta}")));
        }
        if self.iterations == 0 {
            return Err(SpgError::config("iterations must be at least 1"));
        }
        if self.limits.max_trajectories_per_iteration == 0 {
            return Err(SpgError::config("limits.max_trajectories_per_iteration must be at least 1"));
        }
        if self.limits.max_total_trajectories == Some(0) {
            return Err(SpgError::config("limits.max_total_trajectories must be at least 1"));
        }
        self.build().map(|_| ())
    }

    pub fn settings(&self) -> SpgSettings {
        SpgSettings {
            iterations: self.iterations,
            delta: self.safety.delta,
            estimator: self.estimator.kind,
            baseline: self.estimator.baseline,
            limits: SpgLimits {
                max_trajectories_per_iteration: self.limits.max_trajectories_per_iteration,
                max_total_trajectories: self.limits.max_total_trajectories.unwrap_or(usize::MAX),
            },
        }
    }

    pub fn build(&self) -> Result<Problem> {
        match (&self.environment, &self.policy) {
            (EnvironmentConfig::Chain(c), PolicyConfig::Softmax(p)) => finite_problem(make_chain(c)?, p),
            (EnvironmentConfig::Bandit(b), PolicyConfig::Softmax(p)) => finite_problem(make_bandit(&b.rewards, b.gamma)?, p),
            (EnvironmentConfig::Lqg1d(c), PolicyConfig::Gaussian(p)) => lqg_problem(c, p),
            (EnvironmentConfig::Lqg1d(_), PolicyConfig::Softmax(_)) => {
                Err(SpgError::config("policy.kind = \"softmax\" needs a discrete-action environment (chain or bandit)"))
            }
            (_, PolicyConfig::Gaussian(_)) => {
                Err(SpgError::config("policy.kind = \"gaussian\" needs a continuous-action environment (lqg1d)"))
            }
        }
    }
}

fn initial_params(theta0: &Option<Vec<f64>>, dim: usize) -> Result<PolicyParams> {
    match theta0 {
        None => Ok(PolicyParams::zeros(dim)),
        Some(v) if v.len() != dim => Err(SpgError::config(format!("policy.theta0 has {} entries, expected {dim}", v.len()))),
        Some(v) => PolicyParams::from_slice(v),
    }
}

fn finite_problem(mdp: EnumerableMdp, p: &SoftmaxConfig) -> Result<Problem> {
    let features = match (p.features, &p.table) {
        (SoftmaxFeatures::Tabular, None) => FeatureTable::tabular(mdp.n_states(), mdp.n_actions())?,
        (SoftmaxFeatures::Tabular, Some(_)) => {
            return Err(SpgError::config("policy.table is only allowed with policy.features = \"table\""))
        }
        (SoftmaxFeatures::Table, None) => return Err(SpgError::config("policy.features = \"table\" needs policy.table")),
        (SoftmaxFeatures::Table, Some(rows)) => {
            if rows.len() != mdp.n_states() || rows.iter().any(|r| r.len() != mdp.n_actions()) {
                return Err(SpgError::config(format!(
                    "policy.table must be {} states x {} actions",
                    mdp.n_states(),
                    mdp.n_actions()
                )));
            }
            let table = rows.iter().map(|r| r.iter().map(|phi| DVector::from_column_slice(phi)).collect()).collect();
            FeatureTable::new(table)?
        }
    };
    if features.max_norm() > p.feature_bound {
        return Err(SpgError::config(format!(
            "policy.feature_bound = {} is below the largest feature norm {}",
            p.feature_bound,
            features.max_norm()
        )));
    }
    let policy = SoftmaxPolicy::new(p.tau, features, p.feature_bound)?;
    let theta0 = initial_params(&p.theta0, crate::policy::Policy::dim(&policy))?;
    Ok(Problem::Finite { mdp, policy, theta0 })
}

fn lqg_problem(c: &Lqg1dConfig, p: &GaussianConfig) -> Result<Problem> {
    let env = make_lqg1d(*c)?;
    let features = Polynomial::new(p.degree, p.scale)?;
    let edge = c.s_max / p.scale;
    let sup_norm = (1..=p.degree).map(|i| edge.powi(2 * i as i32)).sum::<f64>().sqrt();
    if sup_norm > p.feature_bound * (1.0 + 1e-12) {
        return Err(SpgError::config(format!(
            "policy.feature_bound = {} is below the feature norm {sup_norm} at the state bound",
            p.feature_bound
        )));
    }
    let policy = GaussianPolicy::new(p.sigma, features, p.feature_bound)?;
    let theta0 = initial_params(&p.theta0, p.degree)?;
    Ok(Problem::Lqg { env, policy, theta0 })
}
