//! Certified meta-parameter selection and the safe policy gradient loop.
//!
//! For a smoothing policy the performance is `L`-smooth, which turns every
//! gradient step into a quadratic lower bound on the improvement. The rules
//! here pick the step size (and batch size) that maximise that bound.

use std::f64::consts::PI;

use crate::estimators::{
    error_bound, variance_bound, BaselineKind, ErrorBound, EstimatorKind, GradientAccumulator, GradientEstimate,
};
use crate::mdp::{sample_trajectory, Environment, MdpSpec};
use crate::policy::{Policy, PolicyParams, SmoothingConstants};
use crate::rng::{StreamFactory, StreamId};
use crate::{Result, SpgError};

/// Where a Lipschitz constant came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzProvenance {
    pub constants: SmoothingConstants,
    pub r_max: f64,
    pub gamma: f64,
}

/// Lipschitz constant of the policy gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzConstant {
    value: f64,
    provenance: Option<LipschitzProvenance>,
}

impl LipschitzConstant {
    /// A bare constant, e.g. for exercising the step rules directly.
    pub fn from_value(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(SpgError::config(format!("Lipschitz constant must be finite and non-negative, got {value}")));
        }
        Ok(Self { value, provenance: None })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn provenance(&self) -> Option<&LipschitzProvenance> {
        self.provenance.as_ref()
    }

    /// Multiplies the constant, dropping provenance. Only useful for
    /// sensitivity checks: a scaled-down constant is no longer valid.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { value: self.value * factor, provenance: None }
    }
}

/// `L = R / (1-gamma)^2 * (2 gamma psi^2 / (1-gamma) + kappa + xi)`.
pub fn lipschitz_constant(sc: &SmoothingConstants, spec: &MdpSpec) -> LipschitzConstant {
    let (r, g) = (spec.r_max(), spec.gamma());
    let value = r / ((1.0 - g) * (1.0 - g)) * (2.0 * g * sc.psi * sc.psi / (1.0 - g) + sc.kappa + sc.xi);
    LipschitzConstant {
        value,
        provenance: Some(LipschitzProvenance { constants: *sc, r_max: r, gamma: g }),
    }
}

/// Closed form of `L` for the Gaussian class.
pub fn gaussian_lipschitz(feature_bound: f64, sigma: f64, r_max: f64, gamma: f64) -> f64 {
    let phi2 = feature_bound * feature_bound;
    2.0 * phi2 * r_max / (sigma * sigma * (1.0 - gamma).powi(2)) * (1.0 + 2.0 * gamma / (PI * (1.0 - gamma)))
}

/// Closed form of `L` for the Softmax class.
pub fn softmax_lipschitz(feature_bound: f64, tau: f64, r_max: f64, gamma: f64) -> f64 {
    let phi2 = feature_bound * feature_bound;
    2.0 * phi2 * r_max / (tau * tau * (1.0 - gamma).powi(2)) * (3.0 + 4.0 * gamma / (1.0 - gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaParams {
    pub alpha: f64,
    pub batch_size: usize,
}

/// A lower bound on `J(theta') - J(theta)` holding with probability
/// `confidence`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementBound {
    pub value: f64,
    pub confidence: f64,
}

/// A chosen update together with what it guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeStep {
    pub meta: MetaParams,
    pub guaranteed: ImprovementBound,
}

/// `B(alpha) = alpha ||g||^2 - alpha^2 L/2 ||g||^2` for an exact gradient.
pub fn exact_improvement_bound(alpha: f64, grad_norm: f64, lipschitz: &LipschitzConstant) -> ImprovementBound {
    let g2 = grad_norm * grad_norm;
    ImprovementBound { value: alpha * g2 - alpha * alpha * lipschitz.value() / 2.0 * g2, confidence: 1.0 }
}

/// `alpha* = 1/L`, guaranteeing `||g||^2 / (2L)`.
pub fn optimal_step_exact(lipschitz: &LipschitzConstant) -> Result<MetaParams> {
    if lipschitz.value() <= 0.0 {
        return Err(SpgError::config("optimal step needs a positive Lipschitz constant"));
    }
    Ok(MetaParams { alpha: 1.0 / lipschitz.value(), batch_size: 1 })
}

/// High-probability improvement bound for a step along an estimated
/// gradient built from `batch_size` trajectories (real-valued so the
/// continuous relaxation can be searched).
pub fn stochastic_improvement_bound(
    alpha: f64,
    grad_est_norm: f64,
    err: &ErrorBound,
    batch_size: f64,
    lipschitz: &LipschitzConstant,
) -> ImprovementBound {
    let g = grad_est_norm;
    let margin = err.eps_delta / batch_size.sqrt();
    let inner = if g > margin { g } else { (g + margin) / 2.0 };
    ImprovementBound {
        value: alpha * (g - margin) * inner - alpha * alpha * lipschitz.value() * g * g / 2.0,
        confidence: 1.0 - err.delta,
    }
}

/// Step size maximising the stochastic bound at a fixed batch size. Falls
/// back to `alpha = 0` when the batch is too small to certify anything.
pub fn adaptive_step(
    grad_est_norm: f64,
    err: &ErrorBound,
    batch_size: usize,
    lipschitz: &LipschitzConstant,
) -> Result<SafeStep> {
    if grad_est_norm == 0.0 {
        return Err(SpgError::ZeroGradient);
    }
    if lipschitz.value() <= 0.0 {
        return Err(SpgError::config("adaptive step needs a positive Lipschitz constant"));
    }
    let confidence = 1.0 - err.delta;
    let n = batch_size as f64;
    let g = grad_est_norm;
    if n < err.eps_delta * err.eps_delta / (g * g) {
        return Ok(SafeStep {
            meta: MetaParams { alpha: 0.0, batch_size },
            guaranteed: ImprovementBound { value: 0.0, confidence },
        });
    }
    let margin = err.eps_delta / n.sqrt();
    let alpha = ((1.0 - margin / g) / lipschitz.value()).max(0.0);
    Ok(SafeStep {
        meta: MetaParams { alpha, batch_size },
        guaranteed: ImprovementBound { value: (g - margin).powi(2) / (2.0 * lipschitz.value()), confidence },
    })
}

/// `4 eps^2 / ||g||^2`, infinite for a zero estimate.
pub fn required_batch(grad_est_norm: f64, eps_delta: f64) -> f64 {
    if grad_est_norm == 0.0 {
        return f64::INFINITY;
    }
    4.0 * eps_delta * eps_delta / (grad_est_norm * grad_est_norm)
}

/// Jointly optimal `alpha = 1/(2L)` and `N = ceil(4 eps^2 / ||g||^2)`,
/// guaranteeing `||g||^2 / (8L)` per update.
pub fn optimal_step_and_batch(grad_est_norm: f64, err: &ErrorBound, lipschitz: &LipschitzConstant) -> Result<SafeStep> {
    if grad_est_norm == 0.0 {
        return Err(SpgError::ZeroGradient);
    }
    if lipschitz.value() <= 0.0 {
        return Err(SpgError::config("step rule needs a positive Lipschitz constant"));
    }
    let n = required_batch(grad_est_norm, err.eps_delta).ceil().max(1.0);
    if n > usize::MAX as f64 {
        return Err(SpgError::numeric("required batch size overflows"));
    }
    let l = lipschitz.value();
    Ok(SafeStep {
        meta: MetaParams { alpha: 1.0 / (2.0 * l), batch_size: n as usize },
        guaranteed: ImprovementBound { value: grad_est_norm * grad_est_norm / (8.0 * l), confidence: 1.0 - err.delta },
    })
}

/// Caps that keep the adaptive batch loop finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpgLimits {
    pub max_trajectories_per_iteration: usize,
    pub max_total_trajectories: usize,
}

impl Default for SpgLimits {
    fn default() -> Self {
        Self { max_trajectories_per_iteration: 100_000, max_total_trajectories: usize::MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpgSettings {
    pub iterations: usize,
    /// Per-update failure probability; no union bound across updates.
    pub delta: f64,
    pub estimator: EstimatorKind,
    pub baseline: BaselineKind,
    pub limits: SpgLimits,
}

impl Default for SpgSettings {
    fn default() -> Self {
        Self {
            iterations: 10,
            delta: 0.2,
            estimator: EstimatorKind::Gpomdp,
            baseline: BaselineKind::Zero,
            limits: SpgLimits::default(),
        }
    }
}

/// One row of a run log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub batch_size: usize,
    pub alpha: f64,
    pub grad_norm: f64,
    /// Batch mean of discounted returns.
    pub j_hat: f64,
    pub guaranteed_improvement: f64,
    pub cumulative_trajectories: usize,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpgRun {
    pub records: Vec<IterationRecord>,
    /// `thetas[k]` is the parameter at the start of iteration `k`; the last
    /// entry is the final parameter.
    pub thetas: Vec<PolicyParams>,
    pub lipschitz: LipschitzConstant,
    pub error: ErrorBound,
    /// Whether the improvement guarantee applies (zero baseline only).
    pub certified: bool,
    /// The total trajectory budget ran out before `iterations` finished.
    pub budget_exhausted: bool,
}

impl SpgRun {
    pub fn final_theta(&self) -> &PolicyParams {
        self.thetas.last().expect("thetas always holds theta0")
    }
}

/// Derived constants for an environment/policy pair.
pub fn certified_constants<E: Environment, P: Policy>(
    env: &E,
    policy: &P,
    estimator: EstimatorKind,
    delta: f64,
) -> Result<(LipschitzConstant, ErrorBound)> {
    let sc = policy.smoothing_constants();
    let lipschitz = lipschitz_constant(&sc, env.spec());
    let err = error_bound(variance_bound(estimator, env.spec(), sc.kappa)?, delta)?;
    Ok((lipschitz, err))
}

fn check_finite(est: &GradientEstimate) -> Result<()> {
    if est.vector.iter().any(|x| !x.is_finite()) || !est.mean_return.is_finite() {
        return Err(SpgError::numeric("gradient estimate is not finite"));
    }
    Ok(())
}

/// Safe policy gradient with `alpha = 1/(2L)` and an adaptive batch: each
/// iteration collects trajectories one at a time until
/// `N >= ceil(4 eps^2 / ||g_N||^2)`, then steps along the estimate.
///
/// Trajectory `i` of iteration `k` uses stream `(k, i)` of `streams`. An
/// iteration that hits a trajectory cap ends without updating (logged as
/// stalled); hitting the total cap also ends the run.
pub fn spg_run<E, P>(
    env: &E,
    policy: &P,
    theta0: &PolicyParams,
    settings: &SpgSettings,
    streams: &StreamFactory,
) -> Result<SpgRun>
where
    E: Environment,
    P: Policy<State = E::State, Action = E::Action>,
{
    if settings.iterations == 0 {
        return Err(SpgError::config("iterations must be at least 1"));
    }
    let limits = settings.limits;
    if limits.max_trajectories_per_iteration == 0 || limits.max_total_trajectories == 0 {
        return Err(SpgError::config("trajectory limits must be positive"));
    }
    policy.check_params(theta0)?;
    let (lipschitz, err) = certified_constants(env, policy, settings.estimator, settings.delta)?;
    if lipschitz.value() <= 0.0 {
        return Err(SpgError::config("policy class has a zero Lipschitz constant; nothing to learn"));
    }
    let alpha = 1.0 / (2.0 * lipschitz.value());

    let mut theta = theta0.clone();
    let mut thetas = vec![theta.clone()];
    let mut records = Vec::with_capacity(settings.iterations);
    let mut total = 0usize;
    let mut budget_exhausted = false;

    for k in 0..settings.iterations {
        let iteration = u32::try_from(k).map_err(|_| SpgError::config("too many iterations"))?;
        let mut acc = GradientAccumulator::new(settings.estimator, settings.baseline, env.spec(), policy.dim());
        let mut n = 0usize;
        let (estimate, stalled) = loop {
            let index = u32::try_from(n).map_err(|_| SpgError::config("per-iteration cap too large"))?;
            let traj = sample_trajectory(env, policy, &theta, &mut streams.stream(StreamId::new(iteration, index)))?;
            acc.add_trajectory(&traj, policy, &theta)?;
            n += 1;
            total += 1;
            let est = acc.finalize()?;
            check_finite(&est)?;
            if n as f64 >= required_batch(est.norm(), err.eps_delta).ceil() {
                break (est, false);
            }
            if total >= limits.max_total_trajectories {
                budget_exhausted = true;
                break (est, true);
            }
            if n >= limits.max_trajectories_per_iteration {
                break (est, true);
            }
        };

        let grad_norm = estimate.norm();
        if stalled {
            records.push(IterationRecord {
                iteration: k,
                batch_size: n,
                alpha: 0.0,
                grad_norm,
                j_hat: estimate.mean_return,
                guaranteed_improvement: 0.0,
                cumulative_trajectories: total,
                stalled: true,
            });
        } else {
            theta = theta.stepped(alpha, &estimate.vector)?;
            records.push(IterationRecord {
                iteration: k,
                batch_size: n,
                alpha,
                grad_norm,
                j_hat: estimate.mean_return,
                guaranteed_improvement: grad_norm * grad_norm / (8.0 * lipschitz.value()),
                cumulative_trajectories: total,
                stalled: false,
            });
        }
        thetas.push(theta.clone());
        if budget_exhausted {
            break;
        }
    }

    Ok(SpgRun {
        records,
        thetas,
        lipschitz,
        error: err,
        certified: settings.baseline == BaselineKind::Zero,
        budget_exhausted,
    })
}

/// Plain actor-only policy gradient with a fixed step size and batch size.
/// `guaranteed_improvement` reports the stochastic bound for those
/// meta-parameters, which may be negative.
pub fn fixed_schedule_run<E, P>(
    env: &E,
    policy: &P,
    theta0: &PolicyParams,
    meta: MetaParams,
    settings: &SpgSettings,
    streams: &StreamFactory,
) -> Result<SpgRun>
where
    E: Environment,
    P: Policy<State = E::State, Action = E::Action>,
{
    if meta.batch_size == 0 || !(meta.alpha >= 0.0 && meta.alpha.is_finite()) {
        return Err(SpgError::config("fixed schedule needs alpha >= 0 and N >= 1"));
    }
    policy.check_params(theta0)?;
    let (lipschitz, err) = certified_constants(env, policy, settings.estimator, settings.delta)?;
    let mut theta = theta0.clone();
    let mut thetas = vec![theta.clone()];
    let mut records = Vec::with_capacity(settings.iterations);
    let mut total = 0usize;
    let mut budget_exhausted = false;

    for k in 0..settings.iterations {
        if total + meta.batch_size > settings.limits.max_total_trajectories {
            budget_exhausted = true;
            break;
        }
        let iteration = u32::try_from(k).map_err(|_| SpgError::config("too many iterations"))?;
        let mut acc = GradientAccumulator::new(settings.estimator, settings.baseline, env.spec(), policy.dim());
        for i in 0..meta.batch_size {
            let index = u32::try_from(i).map_err(|_| SpgError::config("batch size too large"))?;
            let traj = sample_trajectory(env, policy, &theta, &mut streams.stream(StreamId::new(iteration, index)))?;
            acc.add_trajectory(&traj, policy, &theta)?;
        }
        total += meta.batch_size;
        let est = acc.finalize()?;
        check_finite(&est)?;
        let grad_norm = est.norm();
        let bound = stochastic_improvement_bound(meta.alpha, grad_norm, &err, meta.batch_size as f64, &lipschitz);
        theta = theta.stepped(meta.alpha, &est.vector)?;
        records.push(IterationRecord {
            iteration: k,
            batch_size: meta.batch_size,
            alpha: meta.alpha,
            grad_norm,
            j_hat: est.mean_return,
            guaranteed_improvement: bound.value,
            cumulative_trajectories: total,
            stalled: false,
        });
        thetas.push(theta.clone());
    }

    Ok(SpgRun { records, thetas, lipschitz, error: err, certified: false, budget_exhausted })
}
