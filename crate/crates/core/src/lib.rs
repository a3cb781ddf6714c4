//! Safe policy gradient.
//!
//! Smoothing parametric policies (Gaussian and Softmax), REINFORCE and GPOMDP
//! gradient estimators with closed-form variance bounds, and the step-size and
//! batch-size rules that certify a non-negative performance improvement at
//! every update with probability at least `1 - delta`.
//!
//! The crate is organised bottom-up:
//!
//! - [`mdp`]: environments, trajectories and sampling.
//! - [`policy`]: smoothing policy classes and their constants.
//! - [`estimators`]: gradient estimators, variance and error bounds.
//! - [`safe`]: Lipschitz constant, improvement bounds, meta-parameter rules
//!   and the safe policy gradient loop.
//! - [`oracle`]: exact performance, gradient and Hessian on small MDPs.
//! - [`harness`]: configuration, CSV logging and the CLI commands.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod mdp;
pub mod oracle;
pub mod policy;
pub mod rng;
pub mod safe;

pub use error::{Result, SpgError};
pub use nalgebra::{DMatrix, DVector};
