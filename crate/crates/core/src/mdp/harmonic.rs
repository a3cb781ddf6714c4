use rand::Rng;

use super::{sample_categorical, Environment, MdpSpec};
use crate::{Result, SpgError};

/// Finite-state MDP with a scalar continuous action whose reward and
/// transition kernel are trigonometric in the action:
///
/// ```text
/// r(s, a)     = amp[s] cos(omega a + reward_phase[s]) + offset[s]
/// w(s, a)     = (1 + cos(omega a + switch_phase[s])) / 2
/// P(.|s, a)   = w(s, a) high[s] + (1 - w(s, a)) low[s]
/// ```
///
/// Under a Gaussian action `a ~ N(mu, sigma^2)` every expectation has a
/// closed form, so the exact performance of a Gaussian policy can be
/// computed by backward induction.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicMdp {
    omega: f64,
    amp: Vec<f64>,
    offset: Vec<f64>,
    reward_phase: Vec<f64>,
    switch_phase: Vec<f64>,
    low: Vec<Vec<f64>>,
    high: Vec<Vec<f64>>,
    initial: Vec<f64>,
    spec: MdpSpec,
}

pub struct HarmonicParts {
    pub omega: f64,
    pub amp: Vec<f64>,
    pub offset: Vec<f64>,
    pub reward_phase: Vec<f64>,
    pub switch_phase: Vec<f64>,
    pub low: Vec<Vec<f64>>,
    pub high: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

impl HarmonicMdp {
    pub fn new(parts: HarmonicParts, spec: MdpSpec) -> Result<Self> {
        let n = parts.initial.len();
        if n == 0 {
            return Err(SpgError::config("harmonic MDP needs at least one state"));
        }
        let lens = [
            parts.amp.len(),
            parts.offset.len(),
            parts.reward_phase.len(),
            parts.switch_phase.len(),
            parts.low.len(),
            parts.high.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(SpgError::config("harmonic MDP tables do not match the state count"));
        }
        if !parts.omega.is_finite() {
            return Err(SpgError::config("omega must be finite"));
        }
        for s in 0..n {
            if parts.amp[s].abs() + parts.offset[s].abs() > spec.r_max() {
                return Err(SpgError::config(format!("rewards of state {s} can exceed r_max")));
            }
        }
        for row in parts.low.iter().chain(&parts.high).chain(std::iter::once(&parts.initial)) {
            let total: f64 = row.iter().sum();
            if row.len() != n || row.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
                return Err(SpgError::config("harmonic MDP rows must be probability vectors"));
            }
        }
        Ok(Self {
            omega: parts.omega,
            amp: parts.amp,
            offset: parts.offset,
            reward_phase: parts.reward_phase,
            switch_phase: parts.switch_phase,
            low: parts.low,
            high: parts.high,
            initial: parts.initial,
            spec,
        })
    }

    pub fn random<R: Rng + ?Sized>(n_states: usize, omega: f64, spec: MdpSpec, rng: &mut R) -> Result<Self> {
        let mut simplex = |n: usize| {
            let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect::<Vec<_>>()
        };
        let low = (0..n_states).map(|_| simplex(n_states)).collect();
        let high = (0..n_states).map(|_| simplex(n_states)).collect();
        let initial = simplex(n_states);
        let r = spec.r_max();
        let mut amp = Vec::with_capacity(n_states);
        let mut offset = Vec::with_capacity(n_states);
        let mut reward_phase = Vec::with_capacity(n_states);
        let mut switch_phase = Vec::with_capacity(n_states);
        for _ in 0..n_states {
            let share: f64 = rng.random();
            amp.push(r * share);
            offset.push(r * (1.0 - share) * (2.0 * rng.random::<f64>() - 1.0));
            reward_phase.push(std::f64::consts::TAU * rng.random::<f64>());
            switch_phase.push(std::f64::consts::TAU * rng.random::<f64>());
        }
        Self::new(HarmonicParts { omega, amp, offset, reward_phase, switch_phase, low, high, initial }, spec)
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn reward(&self, s: usize, a: f64) -> f64 {
        self.amp[s] * (self.omega * a + self.reward_phase[s]).cos() + self.offset[s]
    }

    /// Weight on the `high` row when taking action `a` in `s`.
    pub fn switch_weight(&self, s: usize, a: f64) -> f64 {
        0.5 * (1.0 + (self.omega * a + self.switch_phase[s]).cos())
    }

    pub fn low_row(&self, s: usize) -> &[f64] {
        &self.low[s]
    }

    pub fn high_row(&self, s: usize) -> &[f64] {
        &self.high[s]
    }

    /// `E[cos(omega a + c)] = e^{-omega^2 sigma^2 / 2} cos(omega mu + c)` shrink factor.
    pub fn damping(&self, sigma: f64) -> f64 {
        (-0.5 * self.omega * self.omega * sigma * sigma).exp()
    }

    /// Expected reward and its derivative with respect to the action mean.
    pub fn expected_reward(&self, s: usize, mean: f64, sigma: f64) -> (f64, f64) {
        let rho = self.damping(sigma);
        let arg = self.omega * mean + self.reward_phase[s];
        (
            self.amp[s] * rho * arg.cos() + self.offset[s],
            -self.amp[s] * rho * self.omega * arg.sin(),
        )
    }

    /// Expected switch weight and its derivative with respect to the mean.
    pub fn expected_switch(&self, s: usize, mean: f64, sigma: f64) -> (f64, f64) {
        let rho = self.damping(sigma);
        let arg = self.omega * mean + self.switch_phase[s];
        (0.5 * (1.0 + rho * arg.cos()), -0.5 * rho * self.omega * arg.sin())
    }
}

impl Environment for HarmonicMdp {
    type State = usize;
    type Action = f64;

    fn spec(&self) -> &MdpSpec {
        &self.spec
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.initial, rng)
    }

    fn step<R: Rng + ?Sized>(&self, state: &usize, action: &f64, rng: &mut R) -> (usize, f64) {
        let s = *state;
        let w = self.switch_weight(s, *action);
        let row: Vec<f64> = self.low[s]
            .iter()
            .zip(&self.high[s])
            .map(|(lo, hi)| w * hi + (1.0 - w) * lo)
            .collect();
        (sample_categorical(&row, rng), self.reward(s, *action))
    }
}
