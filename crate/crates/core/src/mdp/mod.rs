//! MDP abstractions, trajectory sampling and the desk-scale environments.

mod finite;
mod harmonic;
mod lqg;

pub use finite::{make_bandit, make_chain, ChainConfig, EnumerableMdp};
pub(crate) use finite::sample_categorical;
pub use harmonic::{HarmonicMdp, HarmonicParts};
pub use lqg::{make_lqg1d, Lqg1d, Lqg1dConfig};

use std::fmt::Debug;

use rand::Rng;

use crate::policy::{Policy, PolicyParams};
use crate::{Result, SpgError};

/// Discount, reward bound and effective horizon shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpSpec {
    gamma: f64,
    r_max: f64,
    horizon: usize,
}

impl MdpSpec {
    pub fn new(gamma: f64, r_max: f64, horizon: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(SpgError::config(format!("gamma must lie in (0,1), got {gamma}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(SpgError::config(format!("r_max must be positive and finite, got {r_max}")));
        }
        if horizon == 0 {
            return Err(SpgError::config("horizon must be at least 1"));
        }
        Ok(Self { gamma, r_max, horizon })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Bound `R` on the absolute reward.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Effective horizon `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `R (1 - gamma^T) / (1 - gamma)`, the largest attainable |return|.
    pub fn return_bound(&self) -> f64 {
        self.r_max * (1.0 - self.gamma.powi(self.horizon as i32)) / (1.0 - self.gamma)
    }
}

/// A fixed-length sequence of states, actions and rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S, A> {
    states: Vec<S>,
    actions: Vec<A>,
    rewards: Vec<f64>,
}

impl<S, A> Trajectory<S, A> {
    pub fn new(states: Vec<S>, actions: Vec<A>, rewards: Vec<f64>) -> Result<Self> {
        if states.len() != actions.len() || states.len() != rewards.len() {
            return Err(SpgError::precondition(format!(
                "trajectory sequences differ in length: {} states, {} actions, {} rewards",
                states.len(),
                actions.len(),
                rewards.len()
            )));
        }
        Ok(Self { states, actions, rewards })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn actions(&self) -> &[A] {
        &self.actions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn steps(&self) -> impl Iterator<Item = (&S, &A, f64)> {
        self.states
            .iter()
            .zip(&self.actions)
            .zip(&self.rewards)
            .map(|((s, a), &r)| (s, a, r))
    }
}

/// An episodic environment with a fixed horizon.
///
/// `reset` and `step` take all randomness from the supplied generator, so
/// the same inputs and stream always produce the same outputs.
pub trait Environment {
    type State: Clone + Debug;
    type Action: Clone + Debug;

    fn spec(&self) -> &MdpSpec;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn step<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: &Self::Action,
        rng: &mut R,
    ) -> (Self::State, f64);
}

/// Rolls out one episode of exactly `spec.horizon()` steps.
pub fn sample_trajectory<E, P, R>(
    env: &E,
    policy: &P,
    theta: &PolicyParams,
    rng: &mut R,
) -> Result<Trajectory<E::State, E::Action>>
where
    E: Environment,
    P: Policy<State = E::State, Action = E::Action>,
    R: Rng + ?Sized,
{
    policy.check_params(theta)?;
    let horizon = env.spec().horizon();
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);

    let mut state = env.reset(rng);
    for _ in 0..horizon {
        let action = policy.sample_action(theta, &state, rng)?;
        let (next, reward) = env.step(&state, &action, rng);
        states.push(state);
        actions.push(action);
        rewards.push(reward);
        state = next;
    }
    Trajectory::new(states, actions, rewards)
}

/// `sum_t gamma^t r_t` over the trajectory.
pub fn discounted_return<S, A>(traj: &Trajectory<S, A>, gamma: f64) -> Result<f64> {
    if traj.is_empty() {
        return Err(SpgError::precondition("discounted return of an empty trajectory"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SpgError::precondition(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let mut discount = 1.0;
    let mut total = 0.0;
    for &r in traj.rewards() {
        total += discount * r;
        discount *= gamma;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(rewards: Vec<f64>) -> Trajectory<usize, usize> {
        let n = rewards.len();
        Trajectory::new(vec![0; n], vec![0; n], rewards).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(MdpSpec::new(0.9, 1.0, 10).is_ok());
        assert!(MdpSpec::new(1.0, 1.0, 10).is_err());
        assert!(MdpSpec::new(0.0, 1.0, 10).is_err());
        assert!(MdpSpec::new(0.9, 0.0, 10).is_err());
        assert!(MdpSpec::new(0.9, 1.0, 0).is_err());
    }

    #[test]
    fn discounted_return_examples() {
        assert_eq!(discounted_return(&traj(vec![1.0, 1.0, 1.0]), 0.5).unwrap(), 1.75);
        assert_eq!(discounted_return(&traj(vec![0.0; 4]), 0.5).unwrap(), 0.0);
        // geometric series (1 - 0.9^10) / 0.1
        let closed = (1.0 - 0.9f64.powi(10)) / 0.1;
        let g = discounted_return(&traj(vec![1.0; 10]), 0.9).unwrap();
        assert!((g - closed).abs() < 1e-12);
        assert!((g - 6.5132).abs() < 1e-4);
    }

    #[test]
    fn discounted_return_rejects_empty() {
        assert!(matches!(
            discounted_return(&traj(vec![]), 0.5),
            Err(SpgError::Precondition(_))
        ));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(Trajectory::<usize, usize>::new(vec![0, 1], vec![0], vec![0.0, 0.0]).is_err());
    }
}
