//! Exact performance, gradient and Hessian on enumerable MDPs, and the
//! Hessian norm against the Lipschitz constant, for both policy classes.
//!
//! ```text
//! cargo run --release --example exact_oracle
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spg::mdp::{make_bandit, EnumerableMdp, Environment, HarmonicMdp, MdpSpec};
use spg::oracle::{
    dp_gradient, enumerated_performance, exact_gradient, exact_hessian, exact_performance, value_table, ExactOracle,
    GaussianOracle, DEFAULT_PATH_BUDGET,
};
use spg::policy::{spectral_norm, FeatureTable, GaussianPolicy, Policy, PolicyParams, SoftmaxPolicy, StateTable};
use spg::safe::lipschitz_constant;
use spg::DVector;

fn main() -> spg::Result<()> {
    // J(theta) = sigmoid(theta) on a two-armed bandit with rewards 1 and 0
    let bandit = make_bandit(&[1.0, 0.0], 0.5)?;
    let table = FeatureTable::new(vec![vec![DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)]])?;
    let sigmoid_policy = SoftmaxPolicy::new(1.0, table, 1.0)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "theta", "J", "dJ", "d2J");
    for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let theta = PolicyParams::from_slice(&[x])?;
        let g = exact_gradient(&bandit, &sigmoid_policy, &theta, DEFAULT_PATH_BUDGET)?;
        let h = exact_hessian(&bandit, &sigmoid_policy, &theta, DEFAULT_PATH_BUDGET)?;
        println!("{x:>6.1} {:>10.6} {:>10.6} {:>10.6}", g.j, g.grad[0], h[(0, 0)]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = MdpSpec::new(0.9, 1.0, 3)?;
    let mdp = EnumerableMdp::random(2, 2, spec, &mut rng)?;
    let policy = SoftmaxPolicy::new(1.0, FeatureTable::tabular(2, 2)?, 1.0)?;
    let theta = PolicyParams::from_slice(&[0.5, -0.5, 1.0, 0.0])?;
    let table = value_table(&mdp, &policy, &theta)?;
    println!("\nrandom 2x2 MDP, T = 3: V = {:?}", table.v);
    println!(
        "J by induction {:.12}, by enumeration {:.12}",
        exact_performance(&mdp, &policy, &theta)?,
        enumerated_performance(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET)?
    );
    let lr = exact_gradient(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET)?.grad;
    let dp = dp_gradient(&mdp, &policy, &theta)?.grad;
    println!("likelihood-ratio vs differentiated induction: max gap {:.2e}", (lr - dp).amax());

    let h = exact_hessian(&mdp, &policy, &theta, DEFAULT_PATH_BUDGET)?;
    let l = lipschitz_constant(&policy.smoothing_constants(), mdp.spec()).value();
    println!("softmax:  |H|_2 = {:.5}, L = {:.1}", spectral_norm(&h), l);

    let harmonic = HarmonicMdp::random(3, 1.5, MdpSpec::new(0.8, 1.0, 4)?, &mut rng)?;
    let gaussian = GaussianPolicy::new(0.6, StateTable::one_hot(3)?, 1.0)?;
    let oracle = GaussianOracle::new(&harmonic, &gaussian);
    let theta = PolicyParams::from_slice(&[0.3, -0.4, 0.9])?;
    let h = oracle.hessian(&theta)?;
    let l = lipschitz_constant(&gaussian.smoothing_constants(), harmonic.spec()).value();
    println!("gaussian: J = {:.5}, |H|_2 = {:.5}, L = {:.1}", oracle.performance(&theta)?, spectral_norm(&h), l);
    Ok(())
}
