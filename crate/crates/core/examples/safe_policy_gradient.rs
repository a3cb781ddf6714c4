//! Safe policy gradient on a two-armed bandit, comparing every update's
//! exact improvement with the certified one.
//!
//! ```text
//! cargo run --release --example safe_policy_gradient
//! ```

use spg::estimators::{BaselineKind, EstimatorKind};
use spg::mdp::make_bandit;
use spg::oracle::exact_performance;
use spg::policy::{FeatureTable, PolicyParams, SoftmaxPolicy};
use spg::rng::StreamFactory;
use spg::safe::{spg_run, SpgLimits, SpgSettings};
use spg::DVector;

fn main() -> spg::Result<()> {
    let mdp = make_bandit(&[1.0, 0.0], 0.5)?;
    let features = FeatureTable::new(vec![vec![DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)]])?;
    let policy = SoftmaxPolicy::new(1.0, features, 1.0)?;
    let settings = SpgSettings {
        iterations: 10,
        delta: 0.2,
        estimator: EstimatorKind::Gpomdp,
        baseline: BaselineKind::Zero,
        limits: SpgLimits::default(),
    };
    let run = spg_run(&mdp, &policy, &PolicyParams::zeros(1), &settings, &StreamFactory::new(5))?;
    println!("L = {}, eps_delta = {:.4}", run.lipschitz.value(), run.error.eps_delta);
    println!("{:>3} {:>7} {:>10} {:>12} {:>12}", "k", "N", "theta", "true gain", "certified");
    for (k, rec) in run.records.iter().enumerate() {
        let before = exact_performance(&mdp, &policy, &run.thetas[k])?;
        let after = exact_performance(&mdp, &policy, &run.thetas[k + 1])?;
        println!(
            "{k:>3} {:>7} {:>10.5} {:>12.3e} {:>12.3e}",
            rec.batch_size,
            run.thetas[k + 1][0],
            after - before,
            rec.guaranteed_improvement
        );
    }
    println!("total trajectories: {}", run.records.last().map_or(0, |r| r.cumulative_trajectories));
    Ok(())
}
