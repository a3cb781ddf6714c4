use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, MdpSpec};
use crate::{Result, SpgError};

const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite MDP small enough to enumerate.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerableMdp {
    n_states: usize,
    n_actions: usize,
    /// Row-major `[s][a][s']`.
    transition: Vec<f64>,
    /// Row-major `[s][a]`.
    reward: Vec<f64>,
    initial: Vec<f64>,
    spec: MdpSpec,
}

impl EnumerableMdp {
    /// `transition[s][a][s']`, `reward[s][a]` and `initial[s]`, checked for
    /// stochasticity and against `spec.r_max()`.
    pub fn new(
        transition: Vec<Vec<Vec<f64>>>,
        reward: Vec<Vec<f64>>,
        initial: Vec<f64>,
        spec: MdpSpec,
    ) -> Result<Self> {
        let n_states = initial.len();
        if n_states == 0 {
            return Err(SpgError::config("MDP needs at least one state"));
        }
        let n_actions = reward.first().map_or(0, Vec::len);
        if n_actions == 0 {
            return Err(SpgError::config("MDP needs at least one action"));
        }
        if transition.len() != n_states || reward.len() != n_states {
            return Err(SpgError::config("transition/reward tables do not match the state count"));
        }

        let mut flat_p = Vec::with_capacity(n_states * n_actions * n_states);
        for (s, rows) in transition.iter().enumerate() {
            if rows.len() != n_actions {
                return Err(SpgError::config(format!("state {s}: expected {n_actions} action rows")));
            }
            for (a, row) in rows.iter().enumerate() {
                check_distribution(row, n_states, &format!("transition[{s}][{a}]"))?;
                flat_p.extend_from_slice(row);
            }
        }
        check_distribution(&initial, n_states, "initial")?;

        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for (s, row) in reward.iter().enumerate() {
            if row.len() != n_actions {
                return Err(SpgError::config(format!("reward[{s}] has {} entries, expected {n_actions}", row.len())));
            }
            for (a, &r) in row.iter().enumerate() {
                if !r.is_finite() || r.abs() > spec.r_max() {
                    return Err(SpgError::config(format!(
                        "reward[{s}][{a}] = {r} exceeds r_max = {}",
                        spec.r_max()
                    )));
                }
            }
            flat_r.extend_from_slice(row);
        }

        Ok(Self { n_states, n_actions, transition: flat_p, reward: flat_r, initial, spec })
    }

    /// Random instance with Dirichlet(1)-like rows and rewards uniform in
    /// `[-r_max, r_max]`.
    pub fn random<R: Rng + ?Sized>(
        n_states: usize,
        n_actions: usize,
        spec: MdpSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut simplex = |n: usize| {
            let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect::<Vec<_>>()
        };
        let transition = (0..n_states)
            .map(|_| (0..n_actions).map(|_| simplex(n_states)).collect())
            .collect();
        let initial = simplex(n_states);
        let reward = (0..n_states)
            .map(|_| (0..n_actions).map(|_| spec.r_max() * (2.0 * rng.random::<f64>() - 1.0)).collect())
            .collect();
        Self::new(transition, reward, initial, spec)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn spec(&self) -> &MdpSpec {
        &self.spec
    }

    pub fn with_spec(mut self, spec: MdpSpec) -> Result<Self> {
        if self.max_abs_reward() > spec.r_max() {
            return Err(SpgError::config("rewards exceed the new r_max"));
        }
        self.spec = spec;
        Ok(self)
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn max_abs_reward(&self) -> f64 {
        self.reward.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn check_distribution(row: &[f64], n: usize, what: &str) -> Result<()> {
    if row.len() != n {
        return Err(SpgError::config(format!("{what} has {} entries, expected {n}", row.len())));
    }
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(SpgError::config(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(SpgError::config(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

impl Environment for EnumerableMdp {
    type State = usize;
    type Action = usize;

    fn spec(&self) -> &MdpSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.initial, rng)
    }

    fn step<R: Rng + ?Sized>(&self, state: &usize, action: &usize, rng: &mut R) -> (usize, f64) {
        let next = sample_categorical(self.transition_row(*state, *action), rng);
        (next, self.reward(*state, *action))
    }
}


/// Parameters of the discrete chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n: usize,
    pub slip: f64,
    pub goal_reward: f64,
    pub step_reward: f64,
    pub gamma: f64,
    pub horizon: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { n: 3, slip: 0.1, goal_reward: 1.0, step_reward: 0.0, gamma: 0.9, horizon: 5 }
    }
}

/// A left/right chain starting in state 0. Action 0 moves left, action 1
/// moves right; with probability `slip` the agent moves the other way.
/// Every action taken in the last state earns `goal_reward`, all others
/// `step_reward`.
pub fn make_chain(config: &ChainConfig) -> Result<EnumerableMdp> {
    let n = config.n;
    if n < 2 {
        return Err(SpgError::config(format!("chain length must be at least 2, got {n}")));
    }
    if !(0.0..1.0).contains(&config.slip) {
        return Err(SpgError::config(format!("slip must lie in [0,1), got {}", config.slip)));
    }
    let r_max = config.goal_reward.abs().max(config.step_reward.abs());
    let spec = MdpSpec::new(config.gamma, r_max, config.horizon)?;

    let mut transition = vec![vec![vec![0.0; n]; 2]; n];
    for (s, rows) in transition.iter_mut().enumerate() {
        let left = s.saturating_sub(1);
        let right = (s + 1).min(n - 1);
        for (a, row) in rows.iter_mut().enumerate() {
            let (intended, other) = if a == 0 { (left, right) } else { (right, left) };
            row[intended] += 1.0 - config.slip;
            row[other] += config.slip;
        }
    }
    let reward = (0..n)
        .map(|s| {
            let r = if s == n - 1 { config.goal_reward } else { config.step_reward };
            vec![r, r]
        })
        .collect();
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;
    EnumerableMdp::new(transition, reward, initial, spec)
}

/// Single-state bandit with one step per episode.
pub fn make_bandit(rewards: &[f64], gamma: f64) -> Result<EnumerableMdp> {
    let r_max = rewards.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let spec = MdpSpec::new(gamma, r_max, 1)?;
    EnumerableMdp::new(vec![vec![vec![1.0]; rewards.len()]], vec![rewards.to_vec()], vec![1.0], spec)
}
