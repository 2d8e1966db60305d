//! Beta priors fitted to cross-arm conversion means, and conjugate
//! posteriors for Bernoulli arms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Means are clamped into this range before fitting so that rates of
/// exactly 0 or 1 keep the moment equations finite.
const MEAN_CLAMP: f64 = 1e-9;

/// Shape parameters of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    alpha: f64,
    beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta shape parameters must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

/// Result of an empirical fit; `fallback_uniform` is set when the means
/// were too dispersed for any Beta to match and the uniform prior was
/// substituted so that downstream sampling can proceed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFit {
    pub params: BetaParams,
    pub fallback_uniform: bool,
}

/// Method-of-moments Beta fit to a set of means in [0, 1].
///
/// With sample mean `m` and sample variance `v` (denominator `k - 1`),
/// solves `alpha = m * c`, `beta = (1 - m) * c` where
/// `c = m(1-m)/v - 1`. Returns the uniform prior (flagged) when `c <= 0`.
pub fn fit_beta(means: &[f64]) -> Result<BetaFit> {
    if means.len() < 2 {
        return Err(Error::TooFewArms {
            found: means.len(),
            min: 2,
        });
    }
    for &m in means {
        if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
            return Err(Error::InvalidInput(format!(
                "means must lie in [0, 1], got {m}"
            )));
        }
    }
    let mut clamped: Vec<f64> = means
        .iter()
        .map(|&m| m.clamp(MEAN_CLAMP, 1.0 - MEAN_CLAMP))
        .collect();
    // The moments are symmetric in the inputs; summing in sorted order
    // makes the fit bitwise independent of how the arms were ordered.
    clamped.sort_unstable_by(f64::total_cmp);
    if clamped.first() == clamped.last() {
        return Err(Error::DegenerateInput(
            "zero variance across means; beta prior undefined".into(),
        ));
    }
    let k = clamped.len() as f64;
    let sample_mean = clamped.iter().sum::<f64>() / k;
    let sample_var = clamped
        .iter()
        .map(|m| {
            let d = m - sample_mean;
            d * d
        })
        .sum::<f64>()
        / (k - 1.0);
    if sample_var <= 0.0 {
        return Err(Error::DegenerateInput(
            "zero variance across means; beta prior undefined".into(),
        ));
    }
    let common = sample_mean * (1.0 - sample_mean) / sample_var - 1.0;
    if common <= 0.0 {
        return Ok(BetaFit {
            params: BetaParams::uniform(),
            fallback_uniform: true,
        });
    }
    Ok(BetaFit {
        params: BetaParams::new(sample_mean * common, (1.0 - sample_mean) * common)?,
        fallback_uniform: false,
    })
}

/// Conjugate update: adds observed successes and failures to the shapes.
pub fn posterior(prior: &BetaParams, successes: u64, failures: u64) -> BetaParams {
    BetaParams {
        alpha: prior.alpha + successes as f64,
        beta: prior.beta + failures as f64,
    }
}
