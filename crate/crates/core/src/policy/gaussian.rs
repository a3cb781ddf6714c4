use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Policy, PolicyParams, SmoothingConstants, StateFeatures};
use crate::{Result, SpgError};

/// Scalar-action Gaussian with linear mean and fixed standard deviation:
/// `a ~ N(theta^T phi(s), sigma^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy<F> {
    sigma: f64,
    features: F,
    feature_bound: f64,
}

impl<F: StateFeatures> GaussianPolicy<F> {
    /// `feature_bound` must dominate `||phi(s)||` on every visited state;
    /// sampling checks it.
    pub fn new(sigma: f64, features: F, feature_bound: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(SpgError::config(format!("sigma must be positive, got {sigma}")));
        }
        if !(feature_bound >= 0.0 && feature_bound.is_finite()) {
            return Err(SpgError::config(format!("feature_bound must be non-negative, got {feature_bound}")));
        }
        Ok(Self { sigma, features, feature_bound })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn feature_bound(&self) -> f64 {
        self.feature_bound
    }

    pub fn features(&self) -> &F {
        &self.features
    }

    pub fn mean(&self, theta: &PolicyParams, state: &F::State) -> f64 {
        theta.dot(&self.features.eval(state))
    }
}

impl<F: StateFeatures> Policy for GaussianPolicy<F> {
    type State = F::State;
    type Action = f64;

    fn dim(&self) -> usize {
        self.features.dim()
    }

    fn sample_action<R: Rng + ?Sized>(&self, theta: &PolicyParams, state: &F::State, rng: &mut R) -> Result<f64> {
        let phi = self.features.eval(state);
        let norm = phi.norm();
        if norm > self.feature_bound * (1.0 + 1e-12) {
            return Err(SpgError::config(format!(
                "feature norm {norm} exceeds the configured bound {}",
                self.feature_bound
            )));
        }
        let mean = theta.dot(&phi);
        if !mean.is_finite() {
            return Err(SpgError::numeric("Gaussian mean is not finite"));
        }
        let z: f64 = rng.sample(StandardNormal);
        Ok(mean + self.sigma * z)
    }

    fn log_pdf(&self, theta: &PolicyParams, state: &F::State, action: &f64) -> f64 {
        let x = (action - self.mean(theta, state)) / self.sigma;
        -0.5 * (2.0 * PI).ln() - self.sigma.ln() - 0.5 * x * x
    }

    fn score(&self, theta: &PolicyParams, state: &F::State, action: &f64) -> DVector<f64> {
        let phi = self.features.eval(state);
        let residual = action - theta.dot(&phi);
        phi * (residual / (self.sigma * self.sigma))
    }

    fn observed_information(&self, _theta: &PolicyParams, state: &F::State, _action: &f64) -> DMatrix<f64> {
        let phi = self.features.eval(state);
        -(&phi * phi.transpose()) / (self.sigma * self.sigma)
    }

    fn smoothing_constants(&self) -> SmoothingConstants {
        let (phi, sigma) = (self.feature_bound, self.sigma);
        let kappa = phi * phi / (sigma * sigma);
        SmoothingConstants { psi: 2.0 * phi / ((2.0 * PI).sqrt() * sigma), kappa, xi: kappa }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear(sigma: f64) -> GaussianPolicy<Polynomial> {
        GaussianPolicy::new(sigma, Polynomial::new(1, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn score_example() {
        let p = linear(1.0);
        let s = p.score(&PolicyParams::zeros(1), &1.0, &0.5);
        assert_eq!(s.as_slice(), &[0.5]);
    }

    #[test]
    fn score_vanishes_at_mean() {
        let p = linear(0.3);
        let theta = PolicyParams::from_slice(&[0.7]).unwrap();
        assert_eq!(p.score(&theta, &0.8, &(0.7 * 0.8)).as_slice(), &[0.0]);
    }

    #[test]
    fn observed_information_examples() {
        let p = linear(1.0);
        let h = p.observed_information(&PolicyParams::zeros(1), &1.0, &0.3);
        assert_eq!(h[(0, 0)], -1.0);
        let z = p.observed_information(&PolicyParams::zeros(1), &0.0, &0.3);
        assert_eq!(z[(0, 0)], 0.0);
    }

    #[test]
    fn log_pdf_at_peak() {
        let p = linear(1.0);
        let theta = PolicyParams::from_slice(&[2.0]).unwrap();
        assert!((p.log_pdf(&theta, &0.5, &1.0) + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn table_constants() {
        let c = linear(0.5).smoothing_constants();
        assert!((c.psi - 1.595_769_121_605_731).abs() < 1e-12);
        assert_eq!(c.kappa, 4.0);
        assert_eq!(c.xi, 4.0);
        let zero = GaussianPolicy::new(0.5, Polynomial::new(1, 1.0).unwrap(), 0.0).unwrap();
        assert_eq!(zero.smoothing_constants(), SmoothingConstants { psi: 0.0, kappa: 0.0, xi: 0.0 });
    }

    #[test]
    fn invalid_sigma_rejected() {
        assert!(GaussianPolicy::new(0.0, Polynomial::new(1, 1.0).unwrap(), 1.0).is_err());
        assert!(GaussianPolicy::new(-1.0, Polynomial::new(1, 1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn sample_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let p = linear(0.5);
        let zero = PolicyParams::zeros(1);
        let m0: f64 = (0..n).map(|_| p.sample_action(&zero, &0.7, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!(m0.abs() <= 3.0 * 0.5 / (n as f64).sqrt());
        let two = PolicyParams::from_slice(&[2.0]).unwrap();
        let m2: f64 = (0..n).map(|_| p.sample_action(&two, &1.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((m2 - 2.0).abs() <= 3.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn feature_bound_is_enforced() {
        let p = GaussianPolicy::new(1.0, Polynomial::new(1, 1.0).unwrap(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            p.sample_action(&PolicyParams::zeros(1), &3.0, &mut rng),
            Err(SpgError::Config(_))
        ));
    }
}
