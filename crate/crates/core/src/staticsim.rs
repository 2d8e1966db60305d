//! One-shot simulation harness: parametric bootstrap around a ground
//! truth, comparing shrunken estimates against raw means on compound
//! error, per-arm error, and interval coverage.
//!
//! The bootstrap redraws only summary statistics: each replication draws
//! per-arm means from a normal sampling model at a downsampled precision
//! (`std_err` scaled by `sqrt(n / n')`), never unit-level data. Shrunken
//! and raw estimates are always computed from the same draw, so every
//! comparison is paired.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{
    js_estimate, point_estimates, pooled_stats, ArmSummary, DofStyle, EstimateOptions, SigmaMode,
    VarianceForm,
};
use crate::normal::two_sided_z;
use crate::rng::{Stage, StreamFactory};
use crate::scenario::ArmTruth;

/// Study parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticConfig {
    /// Fraction of each arm's sample size the bootstrap keeps.
    pub downsample_fraction: f64,
    pub n_replications: usize,
    /// Confidence level for the coverage study.
    pub level: f64,
    pub seed: u64,
    /// Arm counts for the subsampling curve; `None` skips the curve.
    pub subsample_arm_counts: Option<Vec<usize>>,
    pub dof_style: DofStyle,
    pub variance_form: VarianceForm,
    pub sigma_mode: SigmaMode,
}

impl Default for StaticConfig {
    fn default() -> Self {
        Self {
            downsample_fraction: 0.2,
            n_replications: 1000,
            level: 0.95,
            seed: 0,
            subsample_arm_counts: None,
            dof_style: DofStyle::KMinus3,
            variance_form: VarianceForm::Appendix,
            sigma_mode: SigmaMode::PerArm,
        }
    }
}

impl StaticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.downsample_fraction > 0.0 && self.downsample_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "downsample fraction must lie in (0, 1], got {}",
                self.downsample_fraction
            )));
        }
        if self.n_replications == 0 {
            return Err(Error::InvalidInput(
                "need at least one replication".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Draws one bootstrap replication: per arm, the simulated sample size is
/// `max(1, round(fraction * n))`, the standard error scales by
/// `sqrt(n / n')`, and the simulated mean is normal around the true mean.
pub fn bootstrap_replicate(
    truth: &[ArmTruth],
    fraction: f64,
    rng: &mut impl Rng,
) -> Vec<ArmSummary> {
    truth
        .iter()
        .map(|arm| {
            let n_down = ((fraction * arm.n as f64).round() as u64).max(1);
            let std_err = arm.std_err * (arm.n as f64 / n_down as f64).sqrt();
            let mean = Normal::new(arm.mean, std_err)
                .expect("valid normal parameters")
                .sample(rng);
            ArmSummary {
                arm_id: arm.arm_id.clone(),
                n: n_down,
                mean,
                std_err,
                successes: None,
            }
        })
        .collect()
}

/// Compound error over replications: mean and standard error of
/// `sum_k (estimate_k - truth_k)^2`.
pub fn compound_mse(truth_means: &[f64], estimates: &[Vec<f64>]) -> (f64, f64) {
    let sse: Vec<f64> = estimates
        .iter()
        .map(|est| {
            assert_eq!(est.len(), truth_means.len());
            est.iter()
                .zip(truth_means)
                .map(|(e, t)| (e - t) * (e - t))
                .sum()
        })
        .collect();
    (mean(&sse), standard_error(&sse))
}

/// Delta-method ratio of mean compound errors with replication pairing:
/// `var(A/B) ~ (A/B)^2 (varA/A^2 + varB/B^2 - 2 cov/(A B))`.
///
/// Returns `None` when the denominator mean is zero.
pub fn mse_ratio(sse_num: &[f64], sse_den: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(sse_num.len(), sse_den.len());
    let r = sse_num.len() as f64;
    let a = mean(sse_num);
    let b = mean(sse_den);
    if b == 0.0 {
        return None;
    }
    let ratio = a / b;
    if a == 0.0 || sse_num.len() < 2 {
        return Some((ratio, 0.0));
    }
    let var_a = sample_var(sse_num, a) / r;
    let var_b = sample_var(sse_den, b) / r;
    let cov = sse_num
        .iter()
        .zip(sse_den)
        .map(|(x, y)| (x - a) * (y - b))
        .sum::<f64>()
        / (r - 1.0)
        / r;
    let var_ratio = ratio * ratio * (var_a / (a * a) + var_b / (b * b) - 2.0 * cov / (a * b));
    Some((ratio, var_ratio.max(0.0).sqrt()))
}

/// Per-arm coverage of the supplied intervals (endpoints inclusive),
/// with the binomial standard error of each rate.
pub fn coverage(truth_means: &[f64], intervals: &[Vec<(f64, f64)>]) -> Vec<(f64, f64)> {
    let r = intervals.len();
    let mut hits = vec![0usize; truth_means.len()];
    for rep in intervals {
        assert_eq!(rep.len(), truth_means.len());
        for (k, &(lo, hi)) in rep.iter().enumerate() {
            debug_assert!(lo <= hi, "interval not ordered: [{lo}, {hi}]");
            if truth_means[k] >= lo && truth_means[k] <= hi {
                hits[k] += 1;
            }
        }
    }
    hits.iter()
        .map(|&h| {
            let p = h as f64 / r as f64;
            (p, (p * (1.0 - p) / r as f64).sqrt())
        })
        .collect()
}

/// Compound error summary of one study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundSummary {
    pub mse_js: f64,
    pub se_js: f64,
    pub mse_raw: f64,
    pub se_raw: f64,
    pub ratio: Option<f64>,
    pub ratio_se: Option<f64>,
}

/// Per-arm study outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmStaticRow {
    pub arm_id: String,
    /// `(truth_k - truth_mean) / sd(truths)`; zero when the truth is flat.
    pub standardized_effect: f64,
    pub mse_js: f64,
    pub mse_raw: f64,
    pub mse_ratio: Option<f64>,
    pub coverage_raw: f64,
    pub coverage_raw_se: f64,
    pub coverage_js: f64,
    pub coverage_js_se: f64,
}

/// Raw-vs-shrunk effect pair from the first replication, for the
/// shrinkage-profile data series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkagePoint {
    pub arm_id: String,
    pub raw_effect: f64,
    pub shrunk_effect: f64,
}

/// One point of the error-ratio-versus-arm-count curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub ratio: Option<f64>,
    pub se: Option<f64>,
}

/// Full study output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticReport {
    pub n_replications: usize,
    pub compound: CompoundSummary,
    pub per_arm: Vec<ArmStaticRow>,
    pub shrinkage_profile: Vec<ShrinkagePoint>,
    /// Fraction of arms whose error strictly improved under shrinkage.
    pub improved_fraction: f64,
    pub curve: Option<Vec<CurvePoint>>,
}

struct RepOutcome {
    sse_js: f64,
    sse_raw: f64,
    sq_js: Vec<f64>,
    sq_raw: Vec<f64>,
    cover_js: Vec<bool>,
    cover_raw: Vec<bool>,
}

/// Runs the paired bootstrap study, including the arms curve when
/// configured. Interval construction requires at least one degree of
/// freedom under the configured convention (4 arms for `KMinus3`).
pub fn run_static_study(truth: &[ArmTruth], config: &StaticConfig) -> Result<StaticReport> {
    config.validate()?;
    let k = truth.len();
    if k < 2 {
        return Err(Error::TooFewArms { found: k, min: 2 });
    }
    if config.dof_style.dof(k) < 1.0 {
        return Err(Error::VarianceUndefined { k });
    }

    let factory = StreamFactory::new(config.seed);
    let opts = EstimateOptions {
        level: config.level,
        variance_form: config.variance_form,
        sigma_mode: config.sigma_mode,
    };
    let z = two_sided_z(config.level);
    let truth_means: Vec<f64> = truth.iter().map(|t| t.mean).collect();

    let outcomes: Vec<RepOutcome> = (0..config.n_replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = factory.stream(rep, 0, Stage::Bootstrap, 0);
            let arms = bootstrap_replicate(truth, config.downsample_fraction, &mut rng);
            let pooled = pooled_stats(&arms, config.dof_style).expect("validated above");
            let results = js_estimate(&arms, &pooled, &opts).expect("validated above");
            let mut out = RepOutcome {
                sse_js: 0.0,
                sse_raw: 0.0,
                sq_js: Vec::with_capacity(k),
                sq_raw: Vec::with_capacity(k),
                cover_js: Vec::with_capacity(k),
                cover_raw: Vec::with_capacity(k),
            };
            for (i, (arm, res)) in arms.iter().zip(&results).enumerate() {
                let err_js = res.estimate - truth_means[i];
                let err_raw = arm.mean - truth_means[i];
                out.sse_js += err_js * err_js;
                out.sse_raw += err_raw * err_raw;
                out.sq_js.push(err_js * err_js);
                out.sq_raw.push(err_raw * err_raw);
                out.cover_js
                    .push(truth_means[i] >= res.ci_low && truth_means[i] <= res.ci_high);
                let half = z * arm.std_err;
                out.cover_raw.push(
                    truth_means[i] >= arm.mean - half && truth_means[i] <= arm.mean + half,
                );
            }
            out
        })
        .collect();

    let r = outcomes.len() as f64;
    let sse_js: Vec<f64> = outcomes.iter().map(|o| o.sse_js).collect();
    let sse_raw: Vec<f64> = outcomes.iter().map(|o| o.sse_raw).collect();
    let ratio = mse_ratio(&sse_js, &sse_raw);
    let compound = CompoundSummary {
        mse_js: mean(&sse_js),
        se_js: standard_error(&sse_js),
        mse_raw: mean(&sse_raw),
        se_raw: standard_error(&sse_raw),
        ratio: ratio.map(|(v, _)| v),
        ratio_se: ratio.map(|(_, se)| se),
    };

    let truth_mean = mean(&truth_means);
    let truth_sd = if k > 1 {
        sample_var(&truth_means, truth_mean).sqrt()
    } else {
        0.0
    };

    let mut per_arm = Vec::with_capacity(k);
    let mut improved = 0usize;
    for i in 0..k {
        let mse_js_arm = outcomes.iter().map(|o| o.sq_js[i]).sum::<f64>() / r;
        let mse_raw_arm = outcomes.iter().map(|o| o.sq_raw[i]).sum::<f64>() / r;
        if mse_js_arm < mse_raw_arm {
            improved += 1;
        }
        let cov_js = outcomes.iter().filter(|o| o.cover_js[i]).count() as f64 / r;
        let cov_raw = outcomes.iter().filter(|o| o.cover_raw[i]).count() as f64 / r;
        per_arm.push(ArmStaticRow {
            arm_id: truth[i].arm_id.clone(),
            standardized_effect: if truth_sd > 0.0 {
                (truth_means[i] - truth_mean) / truth_sd
            } else {
                0.0
            },
            mse_js: mse_js_arm,
            mse_raw: mse_raw_arm,
            mse_ratio: if mse_raw_arm > 0.0 {
                Some(mse_js_arm / mse_raw_arm)
            } else {
                None
            },
            coverage_raw: cov_raw,
            coverage_raw_se: (cov_raw * (1.0 - cov_raw) / r).sqrt(),
            coverage_js: cov_js,
            coverage_js_se: (cov_js * (1.0 - cov_js) / r).sqrt(),
        });
    }

    // Shrinkage profile from replication 0, re-derived deterministically.
    let mut rng = factory.stream(0, 0, Stage::Bootstrap, 0);
    let arms0 = bootstrap_replicate(truth, config.downsample_fraction, &mut rng);
    let pooled0 = pooled_stats(&arms0, config.dof_style)?;
    let points0 = point_estimates(&arms0, &pooled0, config.sigma_mode)?;
    let shrinkage_profile = arms0
        .iter()
        .zip(&points0)
        .map(|(arm, p)| ShrinkagePoint {
            arm_id: arm.arm_id.clone(),
            raw_effect: arm.mean - pooled0.grand_mean,
            shrunk_effect: p.estimate - pooled0.grand_mean,
        })
        .collect();

    let curve = match &config.subsample_arm_counts {
        Some(_) => Some(arms_curve(truth, config)?),
        None => None,
    };

    Ok(StaticReport {
        n_replications: config.n_replications,
        compound,
        per_arm,
        shrinkage_profile,
        improved_fraction: improved as f64 / k as f64,
        curve,
    })
}

/// Error-ratio curve over subsampled arm counts. Each replication takes a
/// fresh subsample without replacement and compares point estimates only,
/// so counts as low as 3 are valid under either convention.
pub fn arms_curve(truth: &[ArmTruth], config: &StaticConfig) -> Result<Vec<CurvePoint>> {
    config.validate()?;
    let counts = config
        .subsample_arm_counts
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("no subsample arm counts configured".into()))?;
    let k_full = truth.len();
    for &target in counts {
        if target < 3 || target > k_full {
            return Err(Error::InvalidInput(format!(
                "subsample arm count {target} outside [3, {k_full}]"
            )));
        }
    }

    let factory = StreamFactory::new(config.seed);
    let mut curve = Vec::with_capacity(counts.len());
    for &target in counts {
        let pairs: Vec<(f64, f64)> = (0..config.n_replications as u64)
            .into_par_iter()
            .map(|rep| {
                let mut pick_rng = factory.stream(rep, target as u32, Stage::Subsample, 0);
                let chosen = sample_without_replacement(k_full, target, &mut pick_rng);
                let subset: Vec<ArmTruth> = chosen.iter().map(|&i| truth[i].clone()).collect();
                let mut rng = factory.stream(rep, target as u32, Stage::Bootstrap, 0);
                let arms = bootstrap_replicate(&subset, config.downsample_fraction, &mut rng);
                let pooled = pooled_stats(&arms, config.dof_style).expect("k >= 3");
                let points =
                    point_estimates(&arms, &pooled, config.sigma_mode).expect("k >= 3");
                let mut sse_js = 0.0;
                let mut sse_raw = 0.0;
                for ((arm, point), t) in arms.iter().zip(&points).zip(&subset) {
                    sse_js += (point.estimate - t.mean) * (point.estimate - t.mean);
                    sse_raw += (arm.mean - t.mean) * (arm.mean - t.mean);
                }
                (sse_js, sse_raw)
            })
            .collect();
        let sse_js: Vec<f64> = pairs.iter().map(|&(a, _)| a).collect();
        let sse_raw: Vec<f64> = pairs.iter().map(|&(_, b)| b).collect();
        let ratio = mse_ratio(&sse_js, &sse_raw);
        curve.push(CurvePoint {
            k: target,
            ratio: ratio.map(|(v, _)| v),
            se: ratio.map(|(_, se)| se),
        });
    }
    Ok(curve)
}

fn sample_without_replacement(n: usize, take: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..take {
        let j = i + rng.random_range(0..n - i);
        indices.swap(i, j);
    }
    let mut chosen = indices[..take].to_vec();
    chosen.sort_unstable();
    chosen
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_var(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

fn standard_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (sample_var(values, mean(values)) / values.len() as f64).sqrt()
}
