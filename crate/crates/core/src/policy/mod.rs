//! Smoothing parametric policies.
//!
//! A policy class is smoothing when the expected score norm, squared score
//! norm and observed-information spectral norm are bounded by constants
//! `(psi, kappa, xi)` that depend on neither the parameters nor the state.
//! Both built-in classes ship their constants through
//! [`Policy::smoothing_constants`].

mod features;
mod gaussian;
mod softmax;

pub use features::{ActionFeatures, FeatureTable, Polynomial, StateFeatures, StateTable};
pub use gaussian::GaussianPolicy;
pub use softmax::SoftmaxPolicy;

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::{Result, SpgError};

/// Policy parameter vector; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams(DVector<f64>);

impl PolicyParams {
    pub fn new(theta: DVector<f64>) -> Result<Self> {
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(SpgError::numeric("policy parameters must be finite"));
        }
        Ok(Self(theta))
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(theta))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    /// `theta + step * direction`.
    pub fn stepped(&self, step: f64, direction: &DVector<f64>) -> Result<Self> {
        Self::new(&self.0 + direction * step)
    }
}

impl Deref for PolicyParams {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// `(psi, kappa, xi)` bounding the score norm, squared score norm and
/// observed-information norm in expectation over actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConstants {
    pub psi: f64,
    pub kappa: f64,
    pub xi: f64,
}

impl SmoothingConstants {
    pub fn new(psi: f64, kappa: f64, xi: f64) -> Result<Self> {
        if [psi, kappa, xi].iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(SpgError::config("smoothing constants must be finite and non-negative"));
        }
        Ok(Self { psi, kappa, xi })
    }
}

pub trait Policy {
    type State;
    type Action;

    /// Parameter dimension `m`.
    fn dim(&self) -> usize;

    fn sample_action<R: Rng + ?Sized>(
        &self,
        theta: &PolicyParams,
        state: &Self::State,
        rng: &mut R,
    ) -> Result<Self::Action>;

    fn log_pdf(&self, theta: &PolicyParams, state: &Self::State, action: &Self::Action) -> f64;

    /// `grad_theta log pi(a|s)`.
    fn score(&self, theta: &PolicyParams, state: &Self::State, action: &Self::Action) -> DVector<f64>;

    /// `hess_theta log pi(a|s)`.
    fn observed_information(
        &self,
        theta: &PolicyParams,
        state: &Self::State,
        action: &Self::Action,
    ) -> DMatrix<f64>;

    fn smoothing_constants(&self) -> SmoothingConstants;

    fn check_params(&self, theta: &PolicyParams) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(SpgError::config(format!(
                "parameter dimension {} does not match policy dimension {}",
                theta.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Policies over a finite action set `0..n_actions`.
pub trait DiscretePolicy: Policy<Action = usize> {
    fn n_actions(&self) -> usize;

    fn probabilities(&self, theta: &PolicyParams, state: &Self::State) -> Vec<f64>;
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}
