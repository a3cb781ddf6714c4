//! Exact performance, gradient and Hessian on small MDPs.
//!
//! Finite MDPs are handled by backward induction over `(t, s)` and by
//! explicit enumeration of every `T`-step path. Gaussian policies are
//! handled on [`HarmonicMdp`], whose Gaussian expectations are closed form.
//! Everything here is ground truth for tests and the `validate` command.

use nalgebra::{DMatrix, DVector};

use crate::mdp::{EnumerableMdp, Environment, HarmonicMdp, Trajectory};
use crate::policy::{DiscretePolicy, GaussianPolicy, Policy, PolicyParams, StateFeatures};
use crate::{Result, SpgError};

pub const DEFAULT_PATH_BUDGET: u128 = 1_000_000;
/// Central-difference step for gradients of `J`.
pub const GRADIENT_FD_STEP: f64 = 1e-6;
/// Central-difference step for Hessians (differences of exact gradients).
pub const HESSIAN_FD_STEP: f64 = 1e-4;

/// Exact `T`-step values at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub v: Vec<f64>,
    /// Row-major `[s][a]`.
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactGradient {
    pub j: f64,
    pub grad: DVector<f64>,
}

/// Anything that can return exact `J` and its gradient.
pub trait ExactOracle {
    fn dim(&self) -> usize;

    fn performance(&self, theta: &PolicyParams) -> Result<f64>;

    fn gradient(&self, theta: &PolicyParams) -> Result<ExactGradient>;

    /// Central differences of [`ExactOracle::gradient`], step [`HESSIAN_FD_STEP`].
    fn hessian(&self, theta: &PolicyParams) -> Result<DMatrix<f64>> {
        let mut err = None;
        let h = central_jacobian(
            |x| match PolicyParams::new(x.clone()).and_then(|p| self.gradient(&p)) {
                Ok(g) => g.grad,
                Err(e) => {
                    err.get_or_insert(e);
                    DVector::zeros(x.len())
                }
            },
            theta.as_vector(),
            HESSIAN_FD_STEP,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(h),
        }
    }
}

fn discrete_probabilities<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams) -> Result<Vec<Vec<f64>>>
where
    P: DiscretePolicy<State = usize>,
{
    policy.check_params(theta)?;
    if policy.n_actions() != mdp.n_actions() {
        return Err(SpgError::config(format!(
            "policy has {} actions, MDP has {}",
            policy.n_actions(),
            mdp.n_actions()
        )));
    }
    Ok((0..mdp.n_states()).map(|s| policy.probabilities(theta, &s)).collect())
}

/// Backward induction: `V_T = 0`, `V_t(s) = sum_a pi(a|s) [r + gamma P V_{t+1}]`.
pub fn value_table<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams) -> Result<ValueTable>
where
    P: DiscretePolicy<State = usize>,
{
    let probs = discrete_probabilities(mdp, policy, theta)?;
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.spec().gamma();
    let mut v = vec![0.0; ns];
    let mut q = vec![vec![0.0; na]; ns];
    for _ in 0..mdp.spec().horizon() {
        for (s, row) in q.iter_mut().enumerate() {
            for (a, qa) in row.iter_mut().enumerate() {
                let cont: f64 = mdp.transition_row(s, a).iter().zip(&v).map(|(p, vn)| p * vn).sum();
                *qa = mdp.reward(s, a) + gamma * cont;
            }
        }
        v = (0..ns)
            .map(|s| probs[s].iter().zip(&q[s]).map(|(p, qa)| p * qa).sum())
            .collect();
    }
    Ok(ValueTable { v, q })
}

/// Exact `J(theta)` by backward induction.
pub fn exact_performance<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams) -> Result<f64>
where
    P: DiscretePolicy<State = usize>,
{
    let table = value_table(mdp, policy, theta)?;
    Ok(mdp.initial().iter().zip(&table.v).map(|(m, v)| m * v).sum())
}

/// Number of `(s_0, a_0, ..., s_{T-1}, a_{T-1})` paths.
pub fn path_count(mdp: &EnumerableMdp) -> u128 {
    let per_step = (mdp.n_states() * mdp.n_actions()) as u128;
    per_step.saturating_pow(mdp.spec().horizon() as u32)
}

fn check_budget(mdp: &EnumerableMdp, budget: u128) -> Result<()> {
    let required = path_count(mdp);
    if required > budget {
        return Err(SpgError::OracleBudget { required, budget });
    }
    Ok(())
}

/// Visits every positive-probability `T`-step trajectory with its
/// probability under `pi_theta`.
pub fn enumerate_trajectories<P, F>(
    mdp: &EnumerableMdp,
    policy: &P,
    theta: &PolicyParams,
    budget: u128,
    mut visit: F,
) -> Result<()>
where
    P: DiscretePolicy<State = usize>,
    F: FnMut(f64, &Trajectory<usize, usize>) -> Result<()>,
{
    check_budget(mdp, budget)?;
    let probs = discrete_probabilities(mdp, policy, theta)?;
    let horizon = mdp.spec().horizon();

    struct Walk<'a, F> {
        mdp: &'a EnumerableMdp,
        probs: &'a [Vec<f64>],
        horizon: usize,
        states: Vec<usize>,
        actions: Vec<usize>,
        rewards: Vec<f64>,
        visit: &'a mut F,
    }

    impl<F: FnMut(f64, &Trajectory<usize, usize>) -> Result<()>> Walk<'_, F> {
        fn enter_state(&mut self, s: usize, p: f64) -> Result<()> {
            for a in 0..self.mdp.n_actions() {
                let pa = p * self.probs[s][a];
                if pa == 0.0 {
                    continue;
                }
                self.states.push(s);
                self.actions.push(a);
                self.rewards.push(self.mdp.reward(s, a));
                if self.states.len() == self.horizon {
                    let traj = Trajectory::new(self.states.clone(), self.actions.clone(), self.rewards.clone())?;
                    (self.visit)(pa, &traj)?;
                } else {
                    for (next, &pn) in self.mdp.transition_row(s, a).iter().enumerate() {
                        if pn > 0.0 {
                            self.enter_state(next, pa * pn)?;
                        }
                    }
                }
                self.states.pop();
                self.actions.pop();
                self.rewards.pop();
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        mdp,
        probs: &probs,
        horizon,
        states: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        visit: &mut visit,
    };
    for (s0, &p0) in mdp.initial().iter().enumerate() {
        if p0 > 0.0 {
            walk.enter_state(s0, p0)?;
        }
    }
    Ok(())
}

/// `J(theta)` as the probability-weighted sum over all paths.
pub fn enumerated_performance<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams, budget: u128) -> Result<f64>
where
    P: DiscretePolicy<State = usize>,
{
    let gamma = mdp.spec().gamma();
    let mut j = 0.0;
    enumerate_trajectories(mdp, policy, theta, budget, |p, traj| {
        j += p * discounted(traj.rewards(), gamma);
        Ok(())
    })?;
    Ok(j)
}

fn discounted(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// Likelihood-ratio gradient over all paths:
/// `sum_tau p(tau) (sum_t gamma^t r_t) (sum_t score_t)`.
pub fn exact_gradient<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams, budget: u128) -> Result<ExactGradient>
where
    P: DiscretePolicy<State = usize>,
{
    let gamma = mdp.spec().gamma();
    let mut j = 0.0;
    let mut grad = DVector::zeros(policy.dim());
    enumerate_trajectories(mdp, policy, theta, budget, |p, traj| {
        let ret = discounted(traj.rewards(), gamma);
        j += p * ret;
        for (s, a, _) in traj.steps() {
            grad.axpy(p * ret, &policy.score(theta, s, a), 1.0);
        }
        Ok(())
    })?;
    Ok(ExactGradient { j, grad })
}

/// Gradient by differentiating the backward induction:
/// `dV_t(s) = sum_a pi(a|s) [score(s,a) Q_t(s,a) + gamma sum_s' P dV_{t+1}(s')]`.
pub fn dp_gradient<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams) -> Result<ExactGradient>
where
    P: DiscretePolicy<State = usize>,
{
    let probs = discrete_probabilities(mdp, policy, theta)?;
    let (ns, na, m) = (mdp.n_states(), mdp.n_actions(), policy.dim());
    let gamma = mdp.spec().gamma();
    let scores: Vec<Vec<DVector<f64>>> =
        (0..ns).map(|s| (0..na).map(|a| policy.score(theta, &s, &a)).collect()).collect();
    let mut v = vec![0.0; ns];
    let mut dv = vec![DVector::zeros(m); ns];
    for _ in 0..mdp.spec().horizon() {
        let mut v_new = vec![0.0; ns];
        let mut dv_new = vec![DVector::zeros(m); ns];
        for s in 0..ns {
            for a in 0..na {
                let row = mdp.transition_row(s, a);
                let q = mdp.reward(s, a) + gamma * row.iter().zip(&v).map(|(p, vn)| p * vn).sum::<f64>();
                let pa = probs[s][a];
                v_new[s] += pa * q;
                dv_new[s].axpy(pa * q, &scores[s][a], 1.0);
                for (next, &pn) in row.iter().enumerate() {
                    if pn > 0.0 {
                        dv_new[s].axpy(gamma * pa * pn, &dv[next], 1.0);
                    }
                }
            }
        }
        v = v_new;
        dv = dv_new;
    }
    let mut grad = DVector::zeros(m);
    let mut j = 0.0;
    for (s, &mu) in mdp.initial().iter().enumerate() {
        j += mu * v[s];
        grad.axpy(mu, &dv[s], 1.0);
    }
    Ok(ExactGradient { j, grad })
}

/// Central-difference Hessian of `J` built from [`exact_gradient`].
pub fn exact_hessian<P>(mdp: &EnumerableMdp, policy: &P, theta: &PolicyParams, budget: u128) -> Result<DMatrix<f64>>
where
    P: DiscretePolicy<State = usize>,
{
    DiscreteOracle::new(mdp, policy, budget).hessian(theta)
}

/// Finite MDP with a discrete-action policy.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteOracle<'a, P> {
    pub mdp: &'a EnumerableMdp,
    pub policy: &'a P,
    pub budget: u128,
}

impl<'a, P: DiscretePolicy<State = usize>> DiscreteOracle<'a, P> {
    pub fn new(mdp: &'a EnumerableMdp, policy: &'a P, budget: u128) -> Self {
        Self { mdp, policy, budget }
    }
}

impl<P: DiscretePolicy<State = usize>> ExactOracle for DiscreteOracle<'_, P> {
    fn dim(&self) -> usize {
        self.policy.dim()
    }

    fn performance(&self, theta: &PolicyParams) -> Result<f64> {
        exact_performance(self.mdp, self.policy, theta)
    }

    fn gradient(&self, theta: &PolicyParams) -> Result<ExactGradient> {
        exact_gradient(self.mdp, self.policy, theta, self.budget)
    }
}

/// Gaussian policy on a [`HarmonicMdp`].
#[derive(Debug, Clone, Copy)]
pub struct GaussianOracle<'a, F> {
    pub mdp: &'a HarmonicMdp,
    pub policy: &'a GaussianPolicy<F>,
}

impl<'a, F: StateFeatures<State = usize>> GaussianOracle<'a, F> {
    pub fn new(mdp: &'a HarmonicMdp, policy: &'a GaussianPolicy<F>) -> Self {
        Self { mdp, policy }
    }

    fn induction(&self, theta: &PolicyParams) -> Result<ExactGradient> {
        self.policy.check_params(theta)?;
        let mdp = self.mdp;
        let (ns, m) = (mdp.n_states(), self.policy.dim());
        let (gamma, sigma) = (mdp.spec().gamma(), self.policy.sigma());
        let horizon = mdp.spec().horizon();
        let features: Vec<DVector<f64>> = (0..ns).map(|s| self.policy.features().eval(&s)).collect();
        let means: Vec<f64> = features.iter().map(|phi| theta.dot(phi)).collect();

        let mut v = vec![0.0; ns];
        let mut dv = vec![DVector::zeros(m); ns];
        for _ in 0..horizon {
            let mut v_new = vec![0.0; ns];
            let mut dv_new = vec![DVector::zeros(m); ns];
            for s in 0..ns {
                let (er, der) = mdp.expected_reward(s, means[s], sigma);
                let (ew, dew) = mdp.expected_switch(s, means[s], sigma);
                let (low, high) = (mdp.low_row(s), mdp.high_row(s));
                let low_v: f64 = low.iter().zip(&v).map(|(p, x)| p * x).sum();
                let high_v: f64 = high.iter().zip(&v).map(|(p, x)| p * x).sum();
                v_new[s] = er + gamma * (low_v + ew * (high_v - low_v));
                let d_mean = der + gamma * dew * (high_v - low_v);
                dv_new[s].axpy(d_mean, &features[s], 1.0);
                for next in 0..ns {
                    let p = low[next] + ew * (high[next] - low[next]);
                    dv_new[s].axpy(gamma * p, &dv[next], 1.0);
                }
            }
            v = v_new;
            dv = dv_new;
        }
        let mut grad = DVector::zeros(m);
        let mut j = 0.0;
        for (s, &mu) in mdp.initial().iter().enumerate() {
            j += mu * v[s];
            grad.axpy(mu, &dv[s], 1.0);
        }
        Ok(ExactGradient { j, grad })
    }
}

impl<F: StateFeatures<State = usize>> ExactOracle for GaussianOracle<'_, F> {
    fn dim(&self) -> usize {
        self.policy.dim()
    }

    fn performance(&self, theta: &PolicyParams) -> Result<f64> {
        Ok(self.induction(theta)?.j)
    }

    fn gradient(&self, theta: &PolicyParams) -> Result<ExactGradient> {
        self.induction(theta)
    }
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient<F: FnMut(&DVector<f64>) -> f64>(mut f: F, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let mut probe = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        (up - down) / (2.0 * h)
    })
}

/// Central-difference Jacobian; column `j` is `(f(x + h e_j) - f(x - h e_j)) / 2h`.
pub fn central_jacobian<F: FnMut(&DVector<f64>) -> DVector<f64>>(mut f: F, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        probe[j] = x[j] + h;
        let up = f(&probe);
        probe[j] = x[j] - h;
        let down = f(&probe);
        probe[j] = x[j];
        columns.push((up - down) / (2.0 * h));
    }
    DMatrix::from_columns(&columns)
}

/// A uniform grid axis with `points` samples on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points }
    }

    pub fn fixed(value: f64) -> Self {
        Self { lo: value, hi: value, points: 1 }
    }

    fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.points == 0 || self.lo.partial_cmp(&self.hi).is_none_or(|o| o.is_gt()) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(SpgError::precondition(format!("{name} grid axis is empty or not finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub alpha: f64,
    pub batch: f64,
    pub value: f64,
}

/// Brute-force argmax of `bound(alpha, N)` over the product grid.
pub fn grid_maximize<F: Fn(f64, f64) -> f64>(bound: F, alpha: GridAxis, batch: GridAxis) -> Result<GridOptimum> {
    alpha.validate("alpha")?;
    batch.validate("batch")?;
    let mut best = GridOptimum { alpha: f64::NAN, batch: f64::NAN, value: f64::NEG_INFINITY };
    for i in 0..alpha.points {
        let a = alpha.value(i);
        for k in 0..batch.points {
            let n = batch.value(k);
            let value = bound(a, n);
            if value > best.value {
                best = GridOptimum { alpha: a, batch: n, value };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{make_bandit, MdpSpec};
    use crate::policy::{FeatureTable, SoftmaxPolicy, StateTable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigmoid_bandit() -> (EnumerableMdp, SoftmaxPolicy<FeatureTable>) {
        let mdp = make_bandit(&[1.0, 0.0], 0.9).unwrap();
        let table = FeatureTable::new(vec![vec![DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)]]).unwrap();
        (mdp, SoftmaxPolicy::new(1.0, table, 1.0).unwrap())
    }

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn single_state_single_action() {
        let spec = MdpSpec::new(0.5, 1.0, 3).unwrap();
        let mdp = EnumerableMdp::new(vec![vec![vec![1.0]]], vec![vec![1.0]], vec![1.0], spec).unwrap();
        let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(1, 1).unwrap(), 1.0).unwrap();
        let j = exact_performance(&mdp, &policy, &PolicyParams::zeros(1)).unwrap();
        assert_eq!(j, 1.75);
    }

    #[test]
    fn sigmoid_bandit_closed_forms() {
        let (mdp, policy) = sigmoid_bandit();
        for x in [-2.0, -0.3, 0.0, 0.8, 3.0] {
            let theta = PolicyParams::from_slice(&[x]).unwrap();
            let j = exact_performance(&mdp, &policy, &theta).unwrap();
            assert!((j - sigmoid(x)).abs() < 1e-15);
            let g = exact_gradient(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET).unwrap();
            assert!((g.grad[0] - sigmoid(x) * (1.0 - sigmoid(x))).abs() < 1e-15);
        }
        let zero = PolicyParams::zeros(1);
        assert_eq!(exact_performance(&mdp, &policy, &zero).unwrap(), 0.5);
        assert!((exact_gradient(&mdp, &policy, &zero, DEFAULT_PATH_BUDGET).unwrap().grad[0] - 0.25).abs() < 1e-15);
        // sigma'' = sigma (1 - sigma) (1 - 2 sigma) vanishes at 0
        let h = exact_hessian(&mdp, &policy, &zero, DEFAULT_PATH_BUDGET).unwrap();
        assert!(h[(0, 0)].abs() < 1e-9);
    }

    #[test]
    fn mirrored_rewards_cancel() {
        let mdp = make_bandit(&[1.0, -1.0], 0.9).unwrap();
        let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(1, 2).unwrap(), 1.0).unwrap();
        assert_eq!(exact_performance(&mdp, &policy, &PolicyParams::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn constant_reward_has_zero_gradient() {
        let spec = MdpSpec::new(0.8, 1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = EnumerableMdp::random(2, 2, spec, &mut rng).unwrap();
        let trans = (0..2).map(|s| (0..2).map(|a| base.transition_row(s, a).to_vec()).collect()).collect();
        let mdp = EnumerableMdp::new(trans, vec![vec![0.7; 2]; 2], base.initial().to_vec(), spec).unwrap();
        let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(2, 2).unwrap(), 1.0).unwrap();
        let theta = PolicyParams::from_slice(&[0.3, -1.0, 0.2, 0.9]).unwrap();
        let g = exact_gradient(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET).unwrap();
        assert!(g.grad.amax() < 1e-14);
        let h = exact_hessian(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET).unwrap();
        assert!(h.amax() < 1e-9);
    }

    #[test]
    fn budget_is_enforced() {
        let spec = MdpSpec::new(0.8, 1.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mdp = EnumerableMdp::random(2, 2, spec, &mut rng).unwrap();
        let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(2, 2).unwrap(), 1.0).unwrap();
        let theta = PolicyParams::zeros(4);
        assert_eq!(path_count(&mdp), 256);
        assert!(matches!(
            exact_gradient(&mdp, &policy, &theta, 255),
            Err(SpgError::OracleBudget { required: 256, budget: 255 })
        ));
        assert!(exact_gradient(&mdp, &policy, &theta, 256).is_ok());
    }

    #[test]
    fn dp_and_enumeration_agree() {
        let spec = MdpSpec::new(0.85, 1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let policy = SoftmaxPolicy::new(0.7, FeatureTable::tabular(2, 2).unwrap(), 1.0).unwrap();
        for _ in 0..10 {
            let mdp = EnumerableMdp::random(2, 2, spec, &mut rng).unwrap();
            let theta = PolicyParams::from_slice(&[0.4, -0.9, 1.3, 0.1]).unwrap();
            let dp = exact_performance(&mdp, &policy, &theta).unwrap();
            let en = enumerated_performance(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET).unwrap();
            assert!((dp - en).abs() < 1e-10);
            let ge = exact_gradient(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET).unwrap();
            let gd = dp_gradient(&mdp, &policy, &theta).unwrap();
            assert!((ge.grad - gd.grad).amax() < 1e-12);
        }
    }

    #[test]
    fn value_table_consistency() {
        let spec = MdpSpec::new(0.9, 2.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mdp = EnumerableMdp::random(3, 2, spec, &mut rng).unwrap();
        let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(3, 2).unwrap(), 1.0).unwrap();
        let theta = PolicyParams::from_slice(&[0.5, -0.5, 1.0, 0.0, -2.0, 0.3]).unwrap();
        let table = value_table(&mdp, &policy, &theta).unwrap();
        for s in 0..3 {
            let pi = policy.probabilities(&theta, &s);
            let v: f64 = pi.iter().zip(&table.q[s]).map(|(p, q)| p * q).sum();
            assert!((v - table.v[s]).abs() < 1e-12);
            assert!(table.v[s].abs() <= spec.return_bound());
        }
    }

    #[test]
    fn gaussian_oracle_matches_finite_differences() {
        let spec = MdpSpec::new(0.8, 1.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mdp = HarmonicMdp::random(3, 1.5, spec, &mut rng).unwrap();
        let policy = GaussianPolicy::new(0.6, StateTable::one_hot(3).unwrap(), 1.0).unwrap();
        let oracle = GaussianOracle::new(&mdp, &policy);
        let theta = PolicyParams::from_slice(&[0.2, -0.7, 1.1]).unwrap();
        let g = oracle.gradient(&theta).unwrap();
        let fd = central_gradient(
            |x| oracle.performance(&PolicyParams::new(x.clone()).unwrap()).unwrap(),
            theta.as_vector(),
            GRADIENT_FD_STEP,
        );
        assert!((g.grad - fd).amax() < 1e-8);
    }

    #[test]
    fn grid_finds_exact_optimum() {
        let opt = grid_maximize(|a, _| a - a * a, GridAxis::new(0.0, 1.0, 1001), GridAxis::fixed(1.0)).unwrap();
        assert!((opt.alpha - 0.5).abs() < 1e-12);
        assert!((opt.value - 0.25).abs() < 1e-12);
        assert!(grid_maximize(|a, _| a, GridAxis::new(0.0, 1.0, 0), GridAxis::fixed(1.0)).is_err());
        assert!(grid_maximize(|a, _| a, GridAxis::new(1.0, 0.0, 10), GridAxis::fixed(1.0)).is_err());
    }
}
