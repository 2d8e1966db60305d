//! Shrinkage estimation and sequential-experiment simulation for
//! many-armed experiments, working entirely from summary statistics.
//!
//! The library has two halves:
//!
//! - **Estimation** ([`estimator`], [`prior`], [`oracle`]): positive-part
//!   shrinkage of per-arm means toward the cross-arm grand mean, with
//!   calibrated variance estimators and normal-approximation intervals;
//!   empirical Beta priors for Bernoulli arms; and a brute-force
//!   quadrature oracle used to validate the closed forms.
//! - **Simulation** ([`staticsim`], [`bandit`], [`scenario`]): a paired
//!   parametric-bootstrap harness measuring accuracy and coverage of the
//!   shrunken estimates against raw means, and a batch Thompson-sampling
//!   simulator measuring how empirical priors change regret, best-arm
//!   play, and exploration of the top arms.
//!
//! All randomness flows through keyed counter-based streams ([`rng`]), so
//! every simulation is reproducible bit for bit regardless of thread
//! count.

pub mod bandit;
pub mod error;
pub mod estimator;
pub mod normal;
pub mod oracle;
pub mod prior;
pub mod rng;
pub mod scenario;
pub mod staticsim;

pub use error::{Error, Result};
