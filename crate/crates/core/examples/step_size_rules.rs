//! The three meta-parameter rules next to brute-force grid optima of the
//! bounds they maximise.
//!
//! ```text
//! cargo run --release --example step_size_rules
//! ```

use spg::estimators::ErrorBound;
use spg::oracle::{grid_maximize, GridAxis};
use spg::safe::{
    adaptive_step, exact_improvement_bound, optimal_step_and_batch, optimal_step_exact, required_batch,
    stochastic_improvement_bound, LipschitzConstant,
};

fn main() -> spg::Result<()> {
    let l = LipschitzConstant::from_value(2.0)?;

    let exact = optimal_step_exact(&l)?;
    let grid = grid_maximize(|a, _| exact_improvement_bound(a, 1.0, &l).value, GridAxis::new(0.0, 1.0, 1001), GridAxis::fixed(1.0))?;
    println!("exact gradient, |g| = 1:");
    println!("  closed form alpha = {:.4}, bound = {:.6}", exact.alpha, exact_improvement_bound(exact.alpha, 1.0, &l).value);
    println!("  grid        alpha = {:.4}, bound = {:.6}\n", grid.alpha, grid.value);

    let (g, err) = (2.0, ErrorBound { delta: 0.1, eps_delta: 10.0 });
    println!("estimated gradient, |g| = {g}, eps = {}:", err.eps_delta);
    for n in [10usize, 25, 50, 100, 400, 1600] {
        let step = adaptive_step(g, &err, n, &l)?;
        println!("  N = {n:>5}: alpha = {:.5}, guaranteed = {:.6}", step.meta.alpha, step.guaranteed.value);
    }

    let joint = optimal_step_and_batch(g, &err, &l)?;
    println!(
        "\njoint rule: alpha = {}, N = {} (continuous {:.1}), guaranteed {:.6}",
        joint.meta.alpha,
        joint.meta.batch_size,
        required_batch(g, err.eps_delta),
        joint.guaranteed.value
    );
    let per_trajectory = |a: f64, n: f64| stochastic_improvement_bound(a, g, &err, n, &l).value / n;
    let grid = grid_maximize(per_trajectory, GridAxis::new(0.0, 0.5, 1000), GridAxis::new(1.0, 400.0, 1000))?;
    println!("grid optimum of bound / N: alpha = {:.4}, N = {:.1}, value = {:.6}", grid.alpha, grid.batch, grid.value);
    println!("closed form per trajectory: {:.6}", g.powi(4) / (32.0 * l.value() * err.eps_delta.powi(2)));
    println!("rejected branch:            {:.6}", g.powi(4) / (54.0 * l.value() * err.eps_delta.powi(2)));
    Ok(())
}
