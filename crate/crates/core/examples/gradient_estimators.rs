//! REINFORCE and GPOMDP on a small chain: sample estimates against the
//! exact gradient, empirical variance against the closed-form bounds.
//!
//! ```text
//! cargo run --release --example gradient_estimators
//! ```

use spg::estimators::{estimate_gradient, error_bound, variance_bound, BaselineKind, EstimatorKind};
use spg::mdp::{make_chain, sample_trajectory, ChainConfig};
use spg::oracle::{exact_gradient, DEFAULT_PATH_BUDGET};
use spg::policy::{FeatureTable, Policy, PolicyParams, SoftmaxPolicy};
use spg::rng::{StreamFactory, StreamId};
use spg::DVector;

fn main() -> spg::Result<()> {
    let mdp = make_chain(&ChainConfig { gamma: 0.8, horizon: 4, ..ChainConfig::default() })?;
    let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(3, 2)?, 1.0)?;
    let theta = PolicyParams::from_slice(&[0.2, -0.1, 0.0, 0.4, -0.3, 0.1])?;
    let exact = exact_gradient(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET)?;
    println!("exact J = {:.6}, |grad J| = {:.6}", exact.j, exact.grad.norm());

    let streams = StreamFactory::new(42);
    let trajectories: Vec<_> = (0..20_000)
        .map(|i| sample_trajectory(&mdp, &policy, &theta, &mut streams.stream(StreamId::new(0, i))))
        .collect::<spg::Result<_>>()?;
    let kappa = policy.smoothing_constants().kappa;
    let gamma = mdp.spec().gamma();

    for kind in [EstimatorKind::Reinforce, EstimatorKind::Gpomdp] {
        for baseline in [BaselineKind::Zero, BaselineKind::Peters] {
            let batch = estimate_gradient(kind, &trajectories, &policy, &theta, gamma, baseline)?;
            println!(
                "{kind:>9} / {baseline:<6}  N = {}  |estimate - exact| = {:.5}",
                batch.batch_size,
                (&batch.vector - &exact.grad).norm()
            );
        }

        // N = 1 trace variance against the bound
        let mut sum_sq = 0.0;
        let mut mean = DVector::zeros(policy.dim());
        for traj in &trajectories {
            let single = estimate_gradient(kind, std::slice::from_ref(traj), &policy, &theta, gamma, BaselineKind::Zero)?;
            sum_sq += single.vector.norm_squared();
            mean += single.vector;
        }
        let n = trajectories.len() as f64;
        mean /= n;
        let variance = sum_sq / n - mean.norm_squared();
        let bound = variance_bound(kind, mdp.spec(), kappa)?;
        let eps = error_bound(bound, 0.1)?;
        println!(
            "{kind:>9}: empirical variance {:.4} <= bound {:.4}; eps_delta(0.1) = {:.3}\n",
            variance, bound.nu_squared, eps.eps_delta
        );
    }
    Ok(())
}
