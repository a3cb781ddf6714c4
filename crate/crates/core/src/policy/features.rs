use nalgebra::DVector;

use crate::{Result, SpgError};

/// State feature map `phi(s)` for the Gaussian policy.
pub trait StateFeatures {
    type State;

    fn dim(&self) -> usize;

    fn eval(&self, state: &Self::State) -> DVector<f64>;
}

/// State-action feature map `phi(s, a)` for the Softmax policy.
pub trait ActionFeatures {
    type State;

    fn dim(&self) -> usize;

    fn n_actions(&self) -> usize;

    fn eval(&self, state: &Self::State, action: usize) -> DVector<f64>;
}

/// `[(s/scale)^1, ..., (s/scale)^degree]` on a scalar state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polynomial {
    degree: usize,
    scale: f64,
}

impl Polynomial {
    pub fn new(degree: usize, scale: f64) -> Result<Self> {
        if degree == 0 {
            return Err(SpgError::config("polynomial degree must be at least 1"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(SpgError::config("polynomial scale must be positive"));
        }
        Ok(Self { degree, scale })
    }
}

impl StateFeatures for Polynomial {
    type State = f64;

    fn dim(&self) -> usize {
        self.degree
    }

    fn eval(&self, state: &f64) -> DVector<f64> {
        let x = state / self.scale;
        let mut p = 1.0;
        DVector::from_fn(self.degree, |_, _| {
            p *= x;
            p
        })
    }
}

/// Explicit per-state features over `0..n_states`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTable {
    rows: Vec<DVector<f64>>,
}

impl StateTable {
    pub fn new(rows: Vec<DVector<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(SpgError::config("state feature rows must be non-empty and of equal length"));
        }
        Ok(Self { rows })
    }

    pub fn one_hot(n_states: usize) -> Result<Self> {
        Self::new((0..n_states).map(|s| DVector::from_fn(n_states, |i, _| f64::from(u8::from(i == s)))).collect())
    }

    pub fn max_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

impl StateFeatures for StateTable {
    type State = usize;

    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn eval(&self, state: &usize) -> DVector<f64> {
        self.rows[*state].clone()
    }
}

/// Explicit `[s][a]` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    table: Vec<Vec<DVector<f64>>>,
    dim: usize,
    n_actions: usize,
}

impl FeatureTable {
    pub fn new(table: Vec<Vec<DVector<f64>>>) -> Result<Self> {
        let n_actions = table.first().map_or(0, Vec::len);
        let dim = table.first().and_then(|r| r.first()).map_or(0, |v| v.len());
        if n_actions == 0 || dim == 0 {
            return Err(SpgError::config("feature table must have at least one action and one feature"));
        }
        if table.iter().any(|row| row.len() != n_actions || row.iter().any(|v| v.len() != dim)) {
            return Err(SpgError::config("feature table is ragged"));
        }
        Ok(Self { table, dim, n_actions })
    }

    /// One indicator per `(s, a)` pair; `m = n_states * n_actions`.
    pub fn tabular(n_states: usize, n_actions: usize) -> Result<Self> {
        let m = n_states * n_actions;
        Self::new(
            (0..n_states)
                .map(|s| {
                    (0..n_actions)
                        .map(|a| DVector::from_fn(m, |i, _| f64::from(u8::from(i == s * n_actions + a))))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn n_states(&self) -> usize {
        self.table.len()
    }

    pub fn max_norm(&self) -> f64 {
        self.table.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl ActionFeatures for FeatureTable {
    type State = usize;

    fn dim(&self) -> usize {
        self.dim
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn eval(&self, state: &usize, action: usize) -> DVector<f64> {
        self.table[*state][action].clone()
    }
}
