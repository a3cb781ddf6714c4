use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Environment, MdpSpec};
use crate::{Result, SpgError};

/// Scalar linear-quadratic system with clipped state and clipped cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lqg1dConfig {
    pub a: f64,
    pub b: f64,
    pub noise_std: f64,
    pub q: f64,
    pub c: f64,
    pub r_max: f64,
    pub s_max: f64,
    /// Initial states are uniform on `[-init_range, init_range]`.
    pub init_range: f64,
    pub gamma: f64,
    pub horizon: usize,
}

impl Default for Lqg1dConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            noise_std: 0.1,
            q: 1.0,
            c: 0.1,
            r_max: 1.0,
            s_max: 2.0,
            init_range: 1.0,
            gamma: 0.9,
            horizon: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lqg1d {
    config: Lqg1dConfig,
    spec: MdpSpec,
}

/// `s' = clip(A s + B a + noise)`, `r = -min(q s^2 + c a^2, r_max)`.
pub fn make_lqg1d(config: Lqg1dConfig) -> Result<Lqg1d> {
    if config.r_max.is_nan() || config.r_max <= 0.0 {
        return Err(SpgError::config(format!("r_max must be positive, got {}", config.r_max)));
    }
    if !(config.s_max > 0.0 && config.s_max.is_finite()) {
        return Err(SpgError::config(format!("s_max must be positive and finite, got {}", config.s_max)));
    }
    if !(config.q >= 0.0 && config.c >= 0.0) {
        return Err(SpgError::config("cost weights q and c must be non-negative"));
    }
    if !(config.noise_std >= 0.0 && config.noise_std.is_finite()) {
        return Err(SpgError::config("noise_std must be non-negative and finite"));
    }
    if !(config.init_range >= 0.0 && config.init_range <= config.s_max) {
        return Err(SpgError::config("init_range must lie in [0, s_max]"));
    }
    if !(config.a.is_finite() && config.b.is_finite()) {
        return Err(SpgError::config("dynamics coefficients must be finite"));
    }
    let spec = MdpSpec::new(config.gamma, config.r_max, config.horizon)?;
    Ok(Lqg1d { config, spec })
}

impl Lqg1d {
    pub fn config(&self) -> &Lqg1dConfig {
        &self.config
    }

    pub fn reward(&self, state: f64, action: f64) -> f64 {
        let cost = self.config.q * state * state + self.config.c * action * action;
        // NaN cost (from a NaN action) clips to the bound as well
        -cost.min(self.config.r_max)
    }

    fn clip(&self, s: f64) -> f64 {
        if s.is_nan() {
            return 0.0;
        }
        s.clamp(-self.config.s_max, self.config.s_max)
    }
}

impl Environment for Lqg1d {
    type State = f64;
    type Action = f64;

    fn spec(&self) -> &MdpSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.config.init_range * (2.0 * u - 1.0)
    }

    fn step<R: Rng + ?Sized>(&self, state: &f64, action: &f64, rng: &mut R) -> (f64, f64) {
        let z: f64 = rng.sample(StandardNormal);
        let next = self.config.a * state + self.config.b * action + self.config.noise_std * z;
        (self.clip(next), self.reward(*state, *action))
    }
}
