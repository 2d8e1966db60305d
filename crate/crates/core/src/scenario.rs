//! Synthetic ground-truth scenarios for simulation studies.
//!
//! Real experiment data does not ship with the library; studies run on
//! generated scenarios shaped like routine conversion experiments (a few
//! to dozens of arms, conversion rates clustered at a few percent, large
//! per-arm samples). Generators are deterministic in the seed so that
//! fixture files can be regenerated and verified byte for byte.

use rand_distr::{Beta as BetaDist, Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{Stage, StreamFactory};

/// One arm of a ground-truth scenario: the true mean plus the sampling
/// profile (full-sample standard error and sample size) used to emulate
/// re-running the experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmTruth {
    pub arm_id: String,
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
}

/// Bernoulli-style scenario: `k` conversion rates drawn from
/// `Beta(alpha, beta)`, each with the Wald standard error at `n_per_arm`.
pub fn beta_cluster_truth(
    k: usize,
    alpha: f64,
    beta: f64,
    n_per_arm: u64,
    seed: u64,
) -> Result<Vec<ArmTruth>> {
    if k < 2 || n_per_arm == 0 {
        return Err(Error::InvalidInput(
            "need at least 2 arms and a positive sample size".into(),
        ));
    }
    let dist = BetaDist::new(alpha, beta)
        .map_err(|e| Error::InvalidInput(format!("beta shape parameters: {e}")))?;
    let factory = StreamFactory::new(seed);
    Ok((0..k)
        .map(|i| {
            let mut rng = factory.stream(0, 0, Stage::Truth, i as u64);
            let mean: f64 = dist.sample(&mut rng);
            ArmTruth {
                arm_id: format!("arm_{i:02}"),
                mean,
                std_err: (mean * (1.0 - mean) / n_per_arm as f64).sqrt(),
                n: n_per_arm,
            }
        })
        .collect())
}

/// Normal-effects scenario: means `center + tau * z_i` with a common
/// full-sample standard error `sigma`.
pub fn normal_effect_truth(
    k: usize,
    center: f64,
    tau: f64,
    sigma: f64,
    n_per_arm: u64,
    seed: u64,
) -> Result<Vec<ArmTruth>> {
    if k < 2 || n_per_arm == 0 {
        return Err(Error::InvalidInput(
            "need at least 2 arms and a positive sample size".into(),
        ));
    }
    if !(tau >= 0.0 && sigma >= 0.0) {
        return Err(Error::InvalidInput(
            "tau and sigma must be non-negative".into(),
        ));
    }
    let factory = StreamFactory::new(seed);
    Ok((0..k)
        .map(|i| {
            let mut rng = factory.stream(0, 0, Stage::Truth, i as u64);
            let z: f64 = StandardNormal.sample(&mut rng);
            ArmTruth {
                arm_id: format!("arm_{i:02}"),
                mean: center + tau * z,
                std_err: sigma,
                n: n_per_arm,
            }
        })
        .collect())
}
