use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{ActionFeatures, DiscretePolicy, Policy, PolicyParams, SmoothingConstants};
use crate::mdp::sample_categorical;
use crate::{Result, SpgError};

/// Gibbs policy `pi(a|s) ∝ exp(theta^T phi(s, a) / tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy<F> {
    tau: f64,
    features: F,
    feature_bound: f64,
}

impl<F: ActionFeatures> SoftmaxPolicy<F> {
    pub fn new(tau: f64, features: F, feature_bound: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(SpgError::config(format!("tau must be positive, got {tau}")));
        }
        if !(feature_bound >= 0.0 && feature_bound.is_finite()) {
            return Err(SpgError::config(format!("feature_bound must be non-negative, got {feature_bound}")));
        }
        Ok(Self { tau, features, feature_bound })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn feature_bound(&self) -> f64 {
        self.feature_bound
    }

    pub fn features(&self) -> &F {
        &self.features
    }

    fn logits(&self, theta: &PolicyParams, state: &F::State) -> Vec<f64> {
        (0..self.features.n_actions())
            .map(|a| theta.dot(&self.features.eval(state, a)) / self.tau)
            .collect()
    }

    /// Log-probabilities, stabilised by subtracting the largest logit.
    pub fn log_probabilities(&self, theta: &PolicyParams, state: &F::State) -> Vec<f64> {
        let logits = self.logits(theta, state);
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = top + logits.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
        logits.into_iter().map(|l| l - log_z).collect()
    }

    /// `E_{a ~ pi}[phi(s, a)]`.
    pub fn mean_features(&self, theta: &PolicyParams, state: &F::State) -> DVector<f64> {
        let probs = self.probabilities(theta, state);
        let mut mean = DVector::zeros(self.features.dim());
        for (a, p) in probs.iter().enumerate() {
            mean.axpy(*p, &self.features.eval(state, a), 1.0);
        }
        mean
    }
}

impl<F: ActionFeatures> Policy for SoftmaxPolicy<F> {
    type State = F::State;
    type Action = usize;

    fn dim(&self) -> usize {
        self.features.dim()
    }

    fn sample_action<R: Rng + ?Sized>(&self, theta: &PolicyParams, state: &F::State, rng: &mut R) -> Result<usize> {
        for a in 0..self.features.n_actions() {
            let norm = self.features.eval(state, a).norm();
            if norm > self.feature_bound * (1.0 + 1e-12) {
                return Err(SpgError::config(format!(
                    "feature norm {norm} exceeds the configured bound {}",
                    self.feature_bound
                )));
            }
        }
        let probs = self.probabilities(theta, state);
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(SpgError::numeric("Softmax probabilities are not finite"));
        }
        Ok(sample_categorical(&probs, rng))
    }

    fn log_pdf(&self, theta: &PolicyParams, state: &F::State, action: &usize) -> f64 {
        self.log_probabilities(theta, state)[*action]
    }

    fn score(&self, theta: &PolicyParams, state: &F::State, action: &usize) -> DVector<f64> {
        (self.features.eval(state, *action) - self.mean_features(theta, state)) / self.tau
    }

    fn observed_information(&self, theta: &PolicyParams, state: &F::State, _action: &usize) -> DMatrix<f64> {
        let probs = self.probabilities(theta, state);
        let mean = self.mean_features(theta, state);
        let m = self.features.dim();
        let mut info = DMatrix::zeros(m, m);
        for (a, p) in probs.iter().enumerate() {
            let phi = self.features.eval(state, a);
            info += (&phi * (&mean - &phi).transpose()) * *p;
        }
        info / (self.tau * self.tau)
    }

    fn smoothing_constants(&self) -> SmoothingConstants {
        let (phi, tau) = (self.feature_bound, self.tau);
        SmoothingConstants {
            psi: 2.0 * phi / tau,
            kappa: 4.0 * phi * phi / (tau * tau),
            xi: 2.0 * phi * phi / (tau * tau),
        }
    }
}

impl<F: ActionFeatures> DiscretePolicy for SoftmaxPolicy<F> {
    fn n_actions(&self) -> usize {
        self.features.n_actions()
    }

    fn probabilities(&self, theta: &PolicyParams, state: &F::State) -> Vec<f64> {
        self.log_probabilities(theta, state).into_iter().map(f64::exp).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::FeatureTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// One state, two actions, `phi(s, a0) = [1]`, `phi(s, a1) = [0]`.
    fn indicator() -> SoftmaxPolicy<FeatureTable> {
        let table = FeatureTable::new(vec![vec![DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)]]).unwrap();
        SoftmaxPolicy::new(1.0, table, 1.0).unwrap()
    }

    #[test]
    fn score_at_uniform_policy() {
        let p = indicator();
        assert!((p.score(&PolicyParams::zeros(1), &0, &0)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn observed_information_at_uniform_policy() {
        // E[phi (mean - phi)] = 0.5 * 1 * (0.5 - 1) + 0.5 * 0 * 0.5 = -0.25
        let p = indicator();
        let h = p.observed_information(&PolicyParams::zeros(1), &0, &1);
        assert!((h[(0, 0)] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniform_log_probabilities() {
        let p = indicator();
        for a in 0..2 {
            assert!((p.log_pdf(&PolicyParams::zeros(1), &0, &a) - 0.5f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn extreme_parameters_stay_finite() {
        let p = SoftmaxPolicy::new(0.1, FeatureTable::tabular(1, 3).unwrap(), 1.0).unwrap();
        let theta = PolicyParams::from_slice(&[800.0, -800.0, 0.0]).unwrap();
        let lp = p.log_probabilities(&theta, &0);
        assert!(lp.iter().all(|x| x.is_finite()));
        let total: f64 = p.probabilities(&theta, &0).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_constants() {
        let c = SoftmaxPolicy::new(2.0, FeatureTable::tabular(1, 2).unwrap(), 1.0).unwrap().smoothing_constants();
        assert_eq!((c.psi, c.kappa, c.xi), (1.0, 1.0, 0.5));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let p = SoftmaxPolicy::new(1.0, FeatureTable::tabular(1, 4).unwrap(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[p.sample_action(&PolicyParams::zeros(4), &0, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn invalid_tau_rejected() {
        assert!(SoftmaxPolicy::new(0.0, FeatureTable::tabular(1, 2).unwrap(), 1.0).is_err());
    }
}
