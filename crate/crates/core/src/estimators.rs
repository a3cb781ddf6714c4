//! REINFORCE and GPOMDP policy-gradient estimators.
//!
//! Both estimators are available as batch functions and as an incremental
//! [`GradientAccumulator`] that keeps sufficient statistics, so the estimate
//! can be refreshed after every trajectory at constant cost.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::mdp::{MdpSpec, Trajectory};
use crate::policy::{Policy, PolicyParams};
use crate::{Result, SpgError};

/// Baseline denominators below this are treated as degenerate.
const BASELINE_DENOM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Reinforce,
    Gpomdp,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Reinforce => "reinforce",
            EstimatorKind::Gpomdp => "gpomdp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Zero,
    /// Component-wise variance-minimising baseline, estimated from the batch.
    Peters,
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Zero => "zero",
            BaselineKind::Peters => "peters",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub vector: DVector<f64>,
    pub batch_size: usize,
    pub estimator: EstimatorKind,
    pub baseline: BaselineKind,
    /// Batch mean of the discounted returns.
    pub mean_return: f64,
}

impl GradientEstimate {
    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }
}

/// Single-trajectory variance bound: `Var[grad_N] <= nu_squared / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBound {
    pub nu_squared: f64,
}

/// `eps_delta` such that `||grad - grad_N|| <= eps_delta / sqrt(N)` with
/// probability at least `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    pub delta: f64,
    pub eps_delta: f64,
}

/// Per-trajectory quantities shared by both estimators.
struct Rollout {
    /// `gamma^t r_t`
    discounted: Vec<f64>,
    /// `sum_{h <= t} score_h`
    cumulative_scores: Vec<DVector<f64>>,
    ret: f64,
}

impl Rollout {
    fn new<P: Policy>(traj: &Trajectory<P::State, P::Action>, policy: &P, theta: &PolicyParams, gamma: f64) -> Self {
        let mut discounted = Vec::with_capacity(traj.len());
        let mut cumulative_scores = Vec::with_capacity(traj.len());
        let mut running = DVector::zeros(policy.dim());
        let mut discount = 1.0;
        for (s, a, r) in traj.steps() {
            running += policy.score(theta, s, a);
            cumulative_scores.push(running.clone());
            discounted.push(discount * r);
            discount *= gamma;
        }
        let ret = discounted.iter().sum();
        Self { discounted, cumulative_scores, ret }
    }

    fn total_score(&self) -> &DVector<f64> {
        self.cumulative_scores.last().expect("non-empty trajectory")
    }

    /// `(weight, score)` pairs entering the estimator: one pair for
    /// REINFORCE, one per time step for GPOMDP.
    fn slots(&self, kind: EstimatorKind) -> Vec<(f64, &DVector<f64>)> {
        match kind {
            EstimatorKind::Reinforce => vec![(self.ret, self.total_score())],
            EstimatorKind::Gpomdp => self.discounted.iter().copied().zip(&self.cumulative_scores).collect(),
        }
    }

    /// Zero-baseline single-trajectory estimate.
    fn estimate(&self, kind: EstimatorKind) -> DVector<f64> {
        match kind {
            EstimatorKind::Reinforce => self.total_score() * self.ret,
            EstimatorKind::Gpomdp => {
                let mut g = DVector::zeros(self.total_score().len());
                for (w, c) in self.discounted.iter().zip(&self.cumulative_scores) {
                    g.axpy(*w, c, 1.0);
                }
                g
            }
        }
    }
}

/// The zero-baseline estimate from a single trajectory (`N = 1`).
pub fn single_trajectory_estimate<P: Policy>(
    traj: &Trajectory<P::State, P::Action>,
    policy: &P,
    theta: &PolicyParams,
    gamma: f64,
    kind: EstimatorKind,
) -> Result<DVector<f64>> {
    if traj.is_empty() {
        return Err(SpgError::precondition("empty trajectory"));
    }
    policy.check_params(theta)?;
    Ok(Rollout::new(traj, policy, theta, gamma).estimate(kind))
}

fn batch_gradient<P: Policy>(
    kind: EstimatorKind,
    batch: &[Trajectory<P::State, P::Action>],
    policy: &P,
    theta: &PolicyParams,
    gamma: f64,
    baseline: BaselineKind,
) -> Result<GradientEstimate> {
    let first = batch.first().ok_or_else(|| SpgError::precondition("empty batch"))?;
    let horizon = first.len();
    if horizon == 0 || batch.iter().any(|t| t.len() != horizon) {
        return Err(SpgError::precondition("trajectories in a batch must share a non-zero horizon"));
    }
    policy.check_params(theta)?;
    let n = batch.len() as f64;
    let rollouts: Vec<Rollout> = batch.iter().map(|t| Rollout::new(t, policy, theta, gamma)).collect();
    let mean_return = rollouts.iter().map(|r| r.ret).sum::<f64>() / n;

    let mut total = DVector::zeros(policy.dim());
    match baseline {
        BaselineKind::Zero => {
            for r in &rollouts {
                total += r.estimate(kind);
            }
        }
        BaselineKind::Peters => {
            let n_slots = match kind {
                EstimatorKind::Reinforce => 1,
                EstimatorKind::Gpomdp => horizon,
            };
            let mut stats = vec![SlotStats::new(policy.dim()); n_slots];
            for r in &rollouts {
                for (slot, (w, c)) in stats.iter_mut().zip(r.slots(kind)) {
                    slot.add(w, c);
                }
            }
            let baselines: Vec<DVector<f64>> = stats.iter().map(|s| s.baseline(n)).collect();
            for r in &rollouts {
                for ((w, c), b) in r.slots(kind).into_iter().zip(&baselines) {
                    total += c.component_mul(&b.map(|bj| w - bj));
                }
            }
        }
    }
    Ok(GradientEstimate { vector: total / n, batch_size: batch.len(), estimator: kind, baseline, mean_return })
}

/// `(1/N) sum_i (sum_t gamma^t r_t - b) (sum_t score_t)`.
pub fn reinforce_gradient<P: Policy>(
    batch: &[Trajectory<P::State, P::Action>],
    policy: &P,
    theta: &PolicyParams,
    gamma: f64,
    baseline: BaselineKind,
) -> Result<GradientEstimate> {
    batch_gradient(EstimatorKind::Reinforce, batch, policy, theta, gamma, baseline)
}

/// `(1/N) sum_i sum_t (gamma^t r_t - b_t) sum_{h <= t} score_h`.
pub fn gpomdp_gradient<P: Policy>(
    batch: &[Trajectory<P::State, P::Action>],
    policy: &P,
    theta: &PolicyParams,
    gamma: f64,
    baseline: BaselineKind,
) -> Result<GradientEstimate> {
    batch_gradient(EstimatorKind::Gpomdp, batch, policy, theta, gamma, baseline)
}

pub fn estimate_gradient<P: Policy>(
    kind: EstimatorKind,
    batch: &[Trajectory<P::State, P::Action>],
    policy: &P,
    theta: &PolicyParams,
    gamma: f64,
    baseline: BaselineKind,
) -> Result<GradientEstimate> {
    batch_gradient(kind, batch, policy, theta, gamma, baseline)
}

/// Sums over the batch of `w C`, `C`, `w C^2` and `C^2` for one slot.
#[derive(Debug, Clone, PartialEq)]
struct SlotStats {
    weighted: DVector<f64>,
    score: DVector<f64>,
    weighted_sq: DVector<f64>,
    score_sq: DVector<f64>,
}

impl SlotStats {
    fn new(dim: usize) -> Self {
        Self {
            weighted: DVector::zeros(dim),
            score: DVector::zeros(dim),
            weighted_sq: DVector::zeros(dim),
            score_sq: DVector::zeros(dim),
        }
    }

    fn add(&mut self, w: f64, c: &DVector<f64>) {
        let sq = c.component_mul(c);
        self.weighted.axpy(w, c, 1.0);
        self.score += c;
        self.weighted_sq.axpy(w, &sq, 1.0);
        self.score_sq += sq;
    }

    fn merge(&mut self, other: &SlotStats) {
        self.weighted += &other.weighted;
        self.score += &other.score;
        self.weighted_sq += &other.weighted_sq;
        self.score_sq += &other.score_sq;
    }

    /// `b_j = E[w C_j^2] / E[C_j^2]`, zero where the denominator degenerates.
    fn baseline(&self, n: f64) -> DVector<f64> {
        self.weighted_sq.zip_map(&self.score_sq, |num, den| {
            if den / n < BASELINE_DENOM_FLOOR {
                0.0
            } else {
                num / den
            }
        })
    }

    fn apply(&self, n: f64) -> DVector<f64> {
        let b = self.baseline(n);
        &self.weighted - self.score.component_mul(&b)
    }
}

/// Incremental estimator over a growing batch at fixed `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientAccumulator {
    kind: EstimatorKind,
    baseline: BaselineKind,
    gamma: f64,
    horizon: usize,
    count: usize,
    sum_return: f64,
    /// Zero-baseline sum, accumulated exactly like the batch path.
    sum_estimates: DVector<f64>,
    slots: Vec<SlotStats>,
}

impl GradientAccumulator {
    pub fn new(kind: EstimatorKind, baseline: BaselineKind, spec: &MdpSpec, dim: usize) -> Self {
        let horizon = spec.horizon();
        let n_slots = match (baseline, kind) {
            (BaselineKind::Zero, _) => 0,
            (BaselineKind::Peters, EstimatorKind::Reinforce) => 1,
            (BaselineKind::Peters, EstimatorKind::Gpomdp) => horizon,
        };
        Self {
            kind,
            baseline,
            gamma: spec.gamma(),
            horizon,
            count: 0,
            sum_return: 0.0,
            sum_estimates: DVector::zeros(dim),
            slots: vec![SlotStats::new(dim); n_slots],
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn add_trajectory<P: Policy>(
        &mut self,
        traj: &Trajectory<P::State, P::Action>,
        policy: &P,
        theta: &PolicyParams,
    ) -> Result<()> {
        if traj.len() != self.horizon {
            return Err(SpgError::precondition(format!(
                "trajectory has {} steps, accumulator expects {}",
                traj.len(),
                self.horizon
            )));
        }
        if policy.dim() != self.sum_estimates.len() {
            return Err(SpgError::precondition("policy dimension does not match the accumulator"));
        }
        policy.check_params(theta)?;
        let rollout = Rollout::new(traj, policy, theta, self.gamma);
        self.sum_return += rollout.ret;
        self.sum_estimates += rollout.estimate(self.kind);
        for (slot, (w, c)) in self.slots.iter_mut().zip(rollout.slots(self.kind)) {
            slot.add(w, c);
        }
        self.count += 1;
        Ok(())
    }

    /// Combines two accumulators built at the same `theta`.
    pub fn merge(&mut self, other: &GradientAccumulator) -> Result<()> {
        if self.kind != other.kind
            || self.baseline != other.baseline
            || self.horizon != other.horizon
            || self.sum_estimates.len() != other.sum_estimates.len()
        {
            return Err(SpgError::precondition("cannot merge accumulators of different shapes"));
        }
        self.count += other.count;
        self.sum_return += other.sum_return;
        self.sum_estimates += &other.sum_estimates;
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            a.merge(b);
        }
        Ok(())
    }

    pub fn finalize(&self) -> Result<GradientEstimate> {
        if self.count == 0 {
            return Err(SpgError::precondition("no trajectories accumulated"));
        }
        let n = self.count as f64;
        let total = match self.baseline {
            BaselineKind::Zero => self.sum_estimates.clone(),
            BaselineKind::Peters => self
                .slots
                .iter()
                .fold(DVector::zeros(self.sum_estimates.len()), |acc, s| acc + s.apply(n)),
        };
        Ok(GradientEstimate {
            vector: total / n,
            batch_size: self.count,
            estimator: self.kind,
            baseline: self.baseline,
            mean_return: self.sum_return / n,
        })
    }
}

/// Single-trajectory variance bound for a smoothing policy with constant
/// `kappa` (zero baseline).
pub fn variance_bound(kind: EstimatorKind, spec: &MdpSpec, kappa: f64) -> Result<VarianceBound> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(SpgError::precondition(format!("kappa must be non-negative, got {kappa}")));
    }
    let (g, r, t) = (spec.gamma(), spec.r_max(), spec.horizon() as f64);
    let tail = 1.0 - g.powi(spec.horizon() as i32);
    let nu_squared = match kind {
        EstimatorKind::Reinforce => t * kappa * r * r * tail * tail / ((1.0 - g) * (1.0 - g)),
        EstimatorKind::Gpomdp => kappa * r * r * tail / (1.0 - g).powi(3),
    };
    Ok(VarianceBound { nu_squared })
}

/// Chebyshev: `eps_delta = nu / sqrt(delta)`.
pub fn error_bound(vb: VarianceBound, delta: f64) -> Result<ErrorBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SpgError::config(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(ErrorBound { delta, eps_delta: (vb.nu_squared / delta).sqrt() })
}
