//! Smoothing constants of the Gaussian and Softmax policy classes and the
//! Lipschitz constant of the gradient they imply.
//!
//! ```text
//! cargo run --example smoothing_constants
//! ```

use spg::mdp::MdpSpec;
use spg::policy::{FeatureTable, GaussianPolicy, Policy, Polynomial, SoftmaxPolicy};
use spg::safe::lipschitz_constant;

fn main() -> spg::Result<()> {
    let spec = MdpSpec::new(0.9, 1.0, 10)?;
    println!("gamma = {}, r_max = {}, horizon = {}\n", spec.gamma(), spec.r_max(), spec.horizon());
    println!("{:<28} {:>10} {:>10} {:>10} {:>12}", "policy", "psi", "kappa", "xi", "L");

    for sigma in [0.25, 0.5, 1.0, 2.0] {
        let policy = GaussianPolicy::new(sigma, Polynomial::new(1, 1.0)?, 1.0)?;
        let sc = policy.smoothing_constants();
        let l = lipschitz_constant(&sc, &spec).value();
        let name = format!("gaussian sigma={sigma}");
        println!("{name:<28} {:>10.4} {:>10.4} {:>10.4} {:>12.2}", sc.psi, sc.kappa, sc.xi, l);
    }
    for tau in [0.5, 1.0, 2.0, 4.0] {
        let policy = SoftmaxPolicy::new(tau, FeatureTable::tabular(3, 2)?, 1.0)?;
        let sc = policy.smoothing_constants();
        let l = lipschitz_constant(&sc, &spec).value();
        let name = format!("softmax tau={tau}");
        println!("{name:<28} {:>10.4} {:>10.4} {:>10.4} {:>12.2}", sc.psi, sc.kappa, sc.xi, l);
    }

    // Doubling the exploration parameter quarters kappa and xi.
    let narrow = GaussianPolicy::new(0.5, Polynomial::new(1, 1.0)?, 1.0)?.smoothing_constants();
    let wide = GaussianPolicy::new(1.0, Polynomial::new(1, 1.0)?, 1.0)?.smoothing_constants();
    println!("\nkappa(0.5) / kappa(1.0) = {}", narrow.kappa / wide.kappa);
    Ok(())
}
