//! Gaussian policy on the clipped one-dimensional LQG: sampled returns,
//! then a short safe policy gradient run.
//!
//! ```text
//! cargo run --release --example lqg_gaussian
//! ```

use spg::estimators::{BaselineKind, EstimatorKind};
use spg::mdp::{discounted_return, make_lqg1d, sample_trajectory, Lqg1dConfig};
use spg::policy::{GaussianPolicy, Polynomial, PolicyParams};
use spg::rng::{StreamFactory, StreamId};
use spg::safe::{spg_run, SpgLimits, SpgSettings};

fn main() -> spg::Result<()> {
    let env = make_lqg1d(Lqg1dConfig::default())?;
    // s/2 stays within [-1, 1] on the clipped state box
    let policy = GaussianPolicy::new(0.5, Polynomial::new(1, 2.0)?, 1.0)?;
    let streams = StreamFactory::new(9);

    println!("{:>6} {:>12}", "gain", "mean return");
    for gain in [-2.0, -1.0, -0.5, 0.0, 0.5] {
        let theta = PolicyParams::from_slice(&[gain])?;
        let n = 2000;
        let mut total = 0.0;
        for i in 0..n {
            let traj = sample_trajectory(&env, &policy, &theta, &mut streams.stream(StreamId::new(0, i)))?;
            total += discounted_return(&traj, 0.9)?;
        }
        println!("{gain:>6.1} {:>12.4}", total / n as f64);
    }

    let settings = SpgSettings {
        iterations: 4,
        delta: 0.1,
        estimator: EstimatorKind::Gpomdp,
        baseline: BaselineKind::Zero,
        limits: SpgLimits { max_trajectories_per_iteration: 100_000, ..SpgLimits::default() },
    };
    let run = spg_run(&env, &policy, &PolicyParams::from_slice(&[0.0])?, &settings, &streams.fork(1))?;
    println!("\nL = {:.1}, eps_delta = {:.2}", run.lipschitz.value(), run.error.eps_delta);
    for (rec, theta) in run.records.iter().zip(run.thetas.iter().skip(1)) {
        println!(
            "k = {} N = {:>6} J_hat = {:>8.4} gain -> {:.5}{}",
            rec.iteration,
            rec.batch_size,
            rec.j_hat,
            theta[0],
            if rec.stalled { " (stalled)" } else { "" }
        );
    }
    Ok(())
}
