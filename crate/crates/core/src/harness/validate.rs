//! Oracle-backed self-check suite behind the `validate` command.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::runlog::{csv_writer, format_float, read_run_log, write_run_log};
use super::ExitStatus;
use crate::estimators::{single_trajectory_estimate, BaselineKind, EstimatorKind, ErrorBound};
use crate::mdp::{make_bandit, make_chain, ChainConfig, EnumerableMdp, Environment, HarmonicMdp, MdpSpec};
use crate::oracle::{
    central_gradient, enumerate_trajectories, enumerated_performance, exact_gradient, exact_performance, grid_maximize,
    path_count, DiscreteOracle, ExactOracle, GaussianOracle, GridAxis, DEFAULT_PATH_BUDGET, GRADIENT_FD_STEP,
};
use crate::policy::{spectral_norm, FeatureTable, GaussianPolicy, Policy, PolicyParams, SoftmaxPolicy, StateTable};
use crate::rng::StreamFactory;
use crate::safe::{
    adaptive_step, exact_improvement_bound, lipschitz_constant, optimal_step_and_batch, optimal_step_exact, spg_run,
    stochastic_improvement_bound, IterationRecord, LipschitzConstant, SpgLimits, SpgSettings,
};
use crate::{DVector, Result, SpgError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Largest number of trajectory paths an oracle check may enumerate.
    pub budget: u128,
    /// Multiplies every Lipschitz constant the checks use. Values below 1
    /// deliberately corrupt the constant.
    pub lipschitz_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_PATH_BUDGET, lipschitz_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckOutcome::Pass => "pass",
            CheckOutcome::Fail => "fail",
            CheckOutcome::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: String,
    pub observed: Option<f64>,
    pub outcome: CheckOutcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateReport {
    pub checks: Vec<CheckResult>,
}

impl ValidateReport {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn status(&self) -> ExitStatus {
        if self.checks.iter().any(|c| c.outcome == CheckOutcome::Fail) {
            ExitStatus::ValidationFailed
        } else if self.checks.iter().any(|c| c.outcome == CheckOutcome::Skipped) {
            ExitStatus::Skipped
        } else {
            ExitStatus::Success
        }
    }

    /// `check,outcome,tolerance,observed,detail` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        {
            let mut w = csv_writer(&mut buf);
            w.write_record(["check", "outcome", "tolerance", "observed", "detail"])?;
            for c in &self.checks {
                w.write_record([
                    c.name.to_string(),
                    c.outcome.to_string(),
                    c.tolerance.clone(),
                    c.observed.map(format_float).unwrap_or_default(),
                    c.detail.clone(),
                ])?;
            }
            w.flush()?;
        }
        String::from_utf8(buf).map_err(|e| SpgError::numeric(e.to_string()))
    }
}

/// `(observed, passed, detail)`.
type Verdict = (f64, bool, String);

struct Suite {
    options: ValidateOptions,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn record(&mut self, name: &'static str, tolerance: &str, result: Result<Verdict>) {
        let (observed, outcome, detail) = match result {
            Ok((obs, ok, detail)) => (Some(obs), if ok { CheckOutcome::Pass } else { CheckOutcome::Fail }, detail),
            Err(e @ SpgError::OracleBudget { .. }) => (None, CheckOutcome::Skipped, e.to_string()),
            Err(e) => (None, CheckOutcome::Fail, e.to_string()),
        };
        self.checks.push(CheckResult { name, tolerance: tolerance.to_string(), observed, outcome, detail });
    }

    fn plain<F: FnOnce() -> Result<Verdict>>(&mut self, name: &'static str, tolerance: &str, f: F) {
        self.record(name, tolerance, f());
    }

    /// Runs `f` only if `cost` oracle paths fit in the budget.
    fn oracle<F: FnOnce() -> Result<Verdict>>(&mut self, name: &'static str, tolerance: &str, cost: u128, f: F) {
        let budget = self.options.budget;
        let result = if cost > budget { Err(SpgError::OracleBudget { required: cost, budget }) } else { f() };
        self.record(name, tolerance, result);
    }
}

struct Instances {
    small: EnumerableMdp,
    small_policy: SoftmaxPolicy<FeatureTable>,
    chain: EnumerableMdp,
    chain_policy: SoftmaxPolicy<FeatureTable>,
    harmonic: HarmonicMdp,
    gaussian: GaussianPolicy<StateTable>,
    bandit: EnumerableMdp,
    bandit_policy: SoftmaxPolicy<FeatureTable>,
}

impl Instances {
    fn new() -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let small = EnumerableMdp::random(2, 2, MdpSpec::new(0.9, 1.0, 3)?, &mut rng)?;
        let harmonic = HarmonicMdp::random(3, 1.5, MdpSpec::new(0.8, 1.0, 4)?, &mut rng)?;
        let chain = make_chain(&ChainConfig::default())?;
        let bandit_features = FeatureTable::new(vec![vec![DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)]])?;
        Ok(Self {
            small_policy: SoftmaxPolicy::new(1.0, FeatureTable::tabular(2, 2)?, 1.0)?,
            small,
            chain_policy: SoftmaxPolicy::new(1.0, FeatureTable::tabular(3, 2)?, 1.0)?,
            chain,
            gaussian: GaussianPolicy::new(0.6, StateTable::one_hot(3)?, 1.0)?,
            harmonic,
            bandit: make_bandit(&[1.0, 0.0], 0.5)?,
            bandit_policy: SoftmaxPolicy::new(1.0, bandit_features, 1.0)?,
        })
    }
}

fn random_params<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> PolicyParams {
    PolicyParams::new(DVector::from_fn(dim, |_, _| rng.random_range(-radius..=radius))).expect("finite draw")
}

fn scaled_lipschitz<P: Policy>(policy: &P, spec: &MdpSpec, scale: f64) -> LipschitzConstant {
    lipschitz_constant(&policy.smoothing_constants(), spec).scaled(scale)
}

/// Runs every check. Oracle checks whose instance exceeds `options.budget`
/// paths are skipped.
pub fn cmd_validate(options: &ValidateOptions) -> ValidateReport {
    let mut suite = Suite { options: *options, checks: Vec::new() };
    match Instances::new() {
        Ok(inst) => run_checks(&mut suite, &inst),
        Err(e) => suite.record("instances", "-", Err(e)),
    }
    ValidateReport { checks: suite.checks }
}

fn run_checks(suite: &mut Suite, inst: &Instances) {
    let scale = suite.options.lipschitz_scale;
    let small_cost = path_count(&inst.small);
    let chain_cost = path_count(&inst.chain);
    // state sequences visited by the harmonic induction
    let harmonic_cost = (inst.harmonic.n_states() as u128).pow(4);

    suite.oracle("dp-matches-enumeration", "1e-10 abs", small_cost.max(chain_cost), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let t = random_params(&mut rng, 4, 2.0);
            let diff = exact_performance(&inst.small, &inst.small_policy, &t)?
                - enumerated_performance(&inst.small, &inst.small_policy, &t, suite_budget())?;
            worst = worst.max(diff.abs());
            let t = random_params(&mut rng, 6, 2.0);
            let diff = exact_performance(&inst.chain, &inst.chain_policy, &t)?
                - enumerated_performance(&inst.chain, &inst.chain_policy, &t, suite_budget())?;
            worst = worst.max(diff.abs());
        }
        Ok((worst, worst <= 1e-10, "20 random parameters on two instances".into()))
    });

    suite.oracle("gradient-matches-finite-difference", "1e-6 rel", small_cost, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let t = random_params(&mut rng, 4, 2.0);
            let g = exact_gradient(&inst.small, &inst.small_policy, &t, suite_budget())?.grad;
            let fd = central_gradient(
                |x| exact_performance(&inst.small, &inst.small_policy, &PolicyParams::new(x.clone()).expect("finite")).unwrap_or(f64::NAN),
                t.as_vector(),
                GRADIENT_FD_STEP,
            );
            worst = worst.max((&g - &fd).amax() / g.amax().max(1.0));
        }
        Ok((worst, worst <= 1e-6, "100 random parameters".into()))
    });

    suite.oracle("estimator-unbiased", "1e-10 abs", small_cost, || {
        let t = PolicyParams::from_slice(&[0.3, -0.8, 1.1, 0.2])?;
        let exact = exact_gradient(&inst.small, &inst.small_policy, &t, suite_budget())?.grad;
        let gamma = inst.small.spec().gamma();
        let mut worst: f64 = 0.0;
        for kind in [EstimatorKind::Reinforce, EstimatorKind::Gpomdp] {
            let mut mean = DVector::zeros(4);
            enumerate_trajectories(&inst.small, &inst.small_policy, &t, suite_budget(), |p, traj| {
                mean.axpy(p, &single_trajectory_estimate(traj, &inst.small_policy, &t, gamma, kind)?, 1.0);
                Ok(())
            })?;
            worst = worst.max((mean - &exact).amax());
        }
        Ok((worst, worst <= 1e-10, "probability-weighted mean over all paths, both estimators".into()))
    });

    suite.oracle("hessian-symmetric", "1e-6 abs", chain_cost, || {
        let oracle = DiscreteOracle::new(&inst.chain, &inst.chain_policy, suite_budget());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let h = oracle.hessian(&random_params(&mut rng, 6, 2.0))?;
            worst = worst.max((&h - h.transpose()).amax());
        }
        Ok((worst, worst <= 1e-6, "5 random parameters on the chain".into()))
    });

    suite.oracle("hessian-spectral-bound-softmax", "ratio <= 1 + 1e-6", chain_cost, || {
        let oracle = DiscreteOracle::new(&inst.chain, &inst.chain_policy, suite_budget());
        let l = scaled_lipschitz(&inst.chain_policy, inst.chain.spec(), scale).value();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            worst = worst.max(spectral_norm(&oracle.hessian(&random_params(&mut rng, 6, 2.0))?) / l);
        }
        Ok((worst, worst <= 1.0 + 1e-6, "largest ||H||_2 / L over 10 random parameters".into()))
    });

    suite.oracle("hessian-spectral-bound-gaussian", "ratio <= 1 + 1e-6", harmonic_cost, || {
        let oracle = GaussianOracle::new(&inst.harmonic, &inst.gaussian);
        let l = scaled_lipschitz(&inst.gaussian, inst.harmonic.spec(), scale).value();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            worst = worst.max(spectral_norm(&oracle.hessian(&random_params(&mut rng, 3, 2.0))?) / l);
        }
        Ok((worst, worst <= 1.0 + 1e-6, "largest ||H||_2 / L over 10 random parameters".into()))
    });

    suite.oracle("quadratic-bound", "ratio <= 1 (+1e-9 abs)", small_cost, || {
        let (obs, ok) = quadratic_bound_ratio(&inst.small, &inst.small_policy, scale, 200, 7)?;
        Ok((obs, ok, "largest |J(t+d) - J(t) - <d, grad>| / (L/2 |d|^2) over 200 pairs".into()))
    });

    suite.oracle("exact-step-improvement", "1e-9 abs", small_cost, || {
        let l = scaled_lipschitz(&inst.small_policy, inst.small.spec(), scale);
        let alpha = optimal_step_exact(&l)?.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let t = random_params(&mut rng, 4, 2.0);
            let g = exact_gradient(&inst.small, &inst.small_policy, &t, suite_budget())?;
            let next = t.stepped(alpha, &g.grad)?;
            let gain = exact_performance(&inst.small, &inst.small_policy, &next)? - g.j;
            worst = worst.min(gain - exact_improvement_bound(alpha, g.grad.norm(), &l).value);
        }
        Ok((worst, worst >= -1e-9, "smallest true gain minus guaranteed gain, 100 random parameters".into()))
    });

    suite.plain("exact-step-grid", "1% of grid optimum", || {
        let l = LipschitzConstant::from_value(2.0)?;
        let alpha = optimal_step_exact(&l)?.alpha;
        let closed = exact_improvement_bound(alpha, 1.0, &l).value;
        let grid = grid_maximize(|a, _| exact_improvement_bound(a, 1.0, &l).value, GridAxis::new(0.0, 1.0, 1000), GridAxis::fixed(1.0))?;
        let gap = (grid.value - closed) / grid.value;
        Ok((gap, gap <= 0.01, format!("closed form alpha = {alpha}, value = {closed}")))
    });

    suite.plain("adaptive-step-grid", "1% of grid optimum", || {
        let l = LipschitzConstant::from_value(2.0)?;
        let mut worst: f64 = 0.0;
        for (g, eps, n) in [(2.0, 10.0, 100usize), (2.0, 10.0, 30), (0.5, 3.0, 1000), (1.0, 1.0, 1), (1.0, 4.0, 9)] {
            let err = ErrorBound { delta: 0.1, eps_delta: eps };
            let step = adaptive_step(g, &err, n, &l)?;
            let closed = stochastic_improvement_bound(step.meta.alpha, g, &err, n as f64, &l).value;
            let grid = grid_maximize(
                |a, _| stochastic_improvement_bound(a, g, &err, n as f64, &l).value,
                GridAxis::new(0.0, 2.0 / l.value(), 1000),
                GridAxis::fixed(n as f64),
            )?;
            let gap = if grid.value > 0.0 { (grid.value - closed) / grid.value } else { (grid.value - closed).max(0.0) };
            worst = worst.max(gap);
        }
        Ok((worst, worst <= 0.01, "relative gap to the grid optimum, 5 settings".into()))
    });

    suite.plain("joint-step-batch-grid", "1% of grid optimum", || {
        let mut worst: f64 = 0.0;
        for (g, l, eps) in [(2.0, 2.0, 10.0), (0.7, 5.0, 3.0), (1.0, 1.0, 0.9)] {
            let (gap, _) = joint_gap(g, l, eps)?;
            worst = worst.max(gap.abs());
        }
        Ok((worst, worst <= 0.01, "per-trajectory bound at (1/(2L), 4 eps^2/g^2) vs grid, 3 settings".into()))
    });

    suite.plain("rejected-branch-inferior", "strictly below", || {
        let (g, l, eps) = (2.0, 2.0, 10.0);
        let lip = LipschitzConstant::from_value(l)?;
        let err = ErrorBound { delta: 0.1, eps_delta: eps };
        let n = 3.0 * eps * eps / (g * g);
        let rejected = stochastic_improvement_bound(1.0 / (3.0 * l), g, &err, n, &lip).value / n;
        let chosen = g.powi(4) / (32.0 * l * eps * eps);
        Ok((rejected / chosen, rejected < chosen, format!("rejected branch {rejected}, chosen {chosen}")))
    });

    suite.plain("run-log-round-trip", "exact", || {
        let records: Vec<IterationRecord> = (0..4)
            .map(|k| IterationRecord {
                iteration: k,
                batch_size: 10 + k,
                alpha: 1.0 / (3.0 + k as f64),
                grad_norm: (k as f64).sqrt() / 7.0,
                j_hat: -0.1 * k as f64,
                guaranteed_improvement: 1e-7 * k as f64,
                cumulative_trajectories: 100 * (k + 1),
                stalled: k == 2,
            })
            .collect();
        let mut buf = Vec::new();
        write_run_log(&mut buf, &["validate".into()], &records)?;
        let back = read_run_log(buf.as_slice())?;
        let ok = back == records;
        Ok((if ok { 0.0 } else { 1.0 }, ok, "written log parses back bit-for-bit".into()))
    });

    suite.oracle("spg-certified-improvement", "violation rate <= delta + 0.1", path_count(&inst.bandit), || {
        let settings = SpgSettings {
            iterations: 5,
            delta: 0.2,
            estimator: EstimatorKind::Gpomdp,
            baseline: BaselineKind::Zero,
            limits: SpgLimits::default(),
        };
        let (mut updates, mut violations) = (0usize, 0usize);
        for seed in 0..5 {
            let theta0 = PolicyParams::zeros(1);
            let run = spg_run(&inst.bandit, &inst.bandit_policy, &theta0, &settings, &StreamFactory::new(seed))?;
            for (k, rec) in run.records.iter().enumerate().filter(|(_, r)| !r.stalled) {
                let before = exact_performance(&inst.bandit, &inst.bandit_policy, &run.thetas[k])?;
                let after = exact_performance(&inst.bandit, &inst.bandit_policy, &run.thetas[k + 1])?;
                updates += 1;
                if after - before < rec.guaranteed_improvement {
                    violations += 1;
                }
            }
        }
        let rate = if updates == 0 { 0.0 } else { violations as f64 / updates as f64 };
        Ok((rate, updates > 0 && rate <= 0.3, format!("{violations} of {updates} updates below the certified gain")))
    });
}

/// Oracle instances in the suite are tiny, so the enumeration itself runs
/// unbounded once the per-check budget gate has passed.
fn suite_budget() -> u128 {
    u128::MAX
}

/// Largest ratio of the first-order remainder to `(L/2)|d|^2`, and whether
/// every pair satisfied the bound within `1e-9`.
pub(crate) fn quadratic_bound_ratio<P>(mdp: &EnumerableMdp, policy: &P, scale: f64, pairs: usize, seed: u64) -> Result<(f64, bool)>
where
    P: crate::policy::DiscretePolicy<State = usize>,
{
    let l = scaled_lipschitz(policy, mdp.spec(), scale).value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..pairs {
        let t = random_params(&mut rng, policy.dim(), 2.0);
        let radius = 10f64.powf(rng.random_range(-2.0..=0.5));
        let dir = random_params(&mut rng, policy.dim(), 1.0);
        let d = dir.as_vector() * (radius / dir.norm().max(1e-12));
        let g = exact_gradient(mdp, policy, &t, suite_budget())?;
        let moved = exact_performance(mdp, policy, &t.stepped(1.0, &d)?)?;
        let remainder = (moved - g.j - d.dot(&g.grad)).abs();
        let allowance = l / 2.0 * d.norm_squared();
        worst = worst.max(remainder / allowance);
        ok &= remainder <= allowance + 1e-9;
    }
    Ok((worst, ok))
}

/// Relative gap between the per-trajectory bound at the closed-form
/// `(alpha, N)` and a 1000 x 1000 grid optimum; also returns the grid optimum.
pub(crate) fn joint_gap(g: f64, l: f64, eps: f64) -> Result<(f64, crate::oracle::GridOptimum)> {
    let lip = LipschitzConstant::from_value(l)?;
    let err = ErrorBound { delta: 0.1, eps_delta: eps };
    let n_star = 4.0 * eps * eps / (g * g);
    let per_trajectory = |a: f64, n: f64| stochastic_improvement_bound(a, g, &err, n, &lip).value / n;
    let grid = grid_maximize(per_trajectory, GridAxis::new(0.0, 1.0 / l, 1000), GridAxis::new(1.0, 4.0 * n_star, 1000))?;
    let step = optimal_step_and_batch(g, &err, &lip)?;
    let closed = per_trajectory(step.meta.alpha, n_star);
    Ok(((grid.value - closed) / grid.value, grid))
}
