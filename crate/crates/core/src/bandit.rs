//! Batch Thompson sampling over Bernoulli ground truths.
//!
//! The simulator compares two ways of forming per-arm Beta posteriors:
//! a minimal-information uniform prior plus observed counts (the MLE-style
//! comparator), and an empirical prior refit to the observed arm means
//! each batch. Allocation across a batch is proportional to the Monte
//! Carlo posterior probability that each arm is best.
//!
//! Randomness is fully keyed by (seed, replication, batch, stage, arm
//! lane), where the lane is a hash of the arm identifier. Replications can
//! run on any number of threads without changing a single draw, and
//! permuting the arm order of a truth permutes per-arm outputs exactly.

use rand_distr::{Beta as BetaDist, Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{fit_beta, posterior, BetaParams};
use crate::rng::{hash_label, Stage, StreamFactory};

/// True conversion probabilities being simulated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    arm_ids: Vec<String>,
    true_means: Vec<f64>,
    #[serde(skip)]
    lanes: Vec<u64>,
    /// Index of the best arm; ties resolve to the lowest index.
    #[serde(skip)]
    best: usize,
    /// Arm indices sorted by true mean, descending (ties by index).
    #[serde(skip)]
    ranks: Vec<usize>,
}

impl GroundTruth {
    pub fn new(arm_ids: Vec<String>, true_means: Vec<f64>) -> Result<Self> {
        if arm_ids.is_empty() {
            return Err(Error::InvalidInput("ground truth has no arms".into()));
        }
        if arm_ids.len() != true_means.len() {
            return Err(Error::InvalidInput(format!(
                "{} arm ids but {} means",
                arm_ids.len(),
                true_means.len()
            )));
        }
        for (id, &m) in arm_ids.iter().zip(&true_means) {
            if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
                return Err(Error::InvalidInput(format!(
                    "arm {id}: true mean {m} outside [0, 1]"
                )));
            }
        }
        let mut sorted_ids = arm_ids.clone();
        sorted_ids.sort_unstable();
        if sorted_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate arm ids".into()));
        }
        let lanes = arm_ids.iter().map(|id| hash_label(id)).collect();
        let best = true_means
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .unwrap();
        let mut ranks: Vec<usize> = (0..true_means.len()).collect();
        ranks.sort_by(|&a, &b| {
            true_means[b]
                .partial_cmp(&true_means[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        Ok(Self {
            arm_ids,
            true_means,
            lanes,
            best,
            ranks,
        })
    }

    /// Convenience constructor with generated ids `arm_0`, `arm_1`, ...
    pub fn from_means(true_means: Vec<f64>) -> Result<Self> {
        let ids = (0..true_means.len()).map(|i| format!("arm_{i}")).collect();
        Self::new(ids, true_means)
    }

    pub fn len(&self) -> usize {
        self.true_means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_means.is_empty()
    }

    pub fn arm_ids(&self) -> &[String] {
        &self.arm_ids
    }

    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    pub fn best_index(&self) -> usize {
        self.best
    }

    pub fn best_mean(&self) -> f64 {
        self.true_means[self.best]
    }

    /// Arm indices in decreasing order of true mean.
    pub fn rank_order(&self) -> &[usize] {
        &self.ranks
    }
}

/// Which prior feeds the Thompson posteriors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorMode {
    EmpiricalBayes,
    Uniform,
}

impl PriorMode {
    pub fn label(self) -> &'static str {
        match self {
            PriorMode::EmpiricalBayes => "eb",
            PriorMode::Uniform => "uniform",
        }
    }
}

/// Which observations the per-batch prior refit sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefitScope {
    /// All-history per-arm means (default).
    Cumulative,
    /// Means from the previous batch only.
    LastBatch,
}

/// Simulation parameters.
///
/// `n_posterior_draws` should be at least 10_000 for reported runs;
/// smaller values are fine for smoke tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    pub batch_size: u64,
    pub n_batches: usize,
    pub n_posterior_draws: usize,
    pub prior_mode: PriorMode,
    pub refit_scope: RefitScope,
    pub seed: u64,
    /// Fraction of batches treated as the "early" checkpoint.
    pub early_fraction: f64,
    /// How many top-ranked arms get their allocation mass tracked.
    pub top_j: usize,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            batch_size: 1000,
            n_batches: 40,
            n_posterior_draws: 10_000,
            prior_mode: PriorMode::EmpiricalBayes,
            refit_scope: RefitScope::Cumulative,
            seed: 0,
            early_fraction: 0.25,
            top_j: 6,
        }
    }
}

impl BanditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.n_batches == 0 || self.n_posterior_draws == 0 {
            return Err(Error::InvalidInput(
                "batch size, batch count and posterior draws must be positive".into(),
            ));
        }
        if !(self.early_fraction > 0.0 && self.early_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "early fraction must lie in (0, 1), got {}",
                self.early_fraction
            )));
        }
        if self.top_j == 0 {
            return Err(Error::InvalidInput("top_j must be positive".into()));
        }
        Ok(())
    }

    /// Number of completed batches at the early checkpoint.
    pub fn early_batches(&self) -> usize {
        ((self.early_fraction * self.n_batches as f64).ceil() as usize).clamp(1, self.n_batches)
    }
}

/// One batch of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    /// Allocation probabilities used for this batch (sums to 1).
    pub allocation: Vec<f64>,
    /// Units actually assigned to each arm (sums to batch_size).
    pub plays: Vec<u64>,
    /// Bernoulli successes observed per arm.
    pub successes: Vec<u64>,
    /// Expected regret accumulated through this batch.
    pub cumulative_regret: f64,
    /// Allocation probability of the true best arm.
    pub best_arm_probability: f64,
    /// Allocation probability of the true rank-j arm, j = 0..top_j.
    pub top_rank_mass: Vec<f64>,
    /// The empirical prior fit fell back to the uniform prior this batch.
    pub prior_fallback: bool,
}

/// Full per-batch record of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanditTrajectory {
    pub batches: Vec<BatchRecord>,
}

impl BanditTrajectory {
    pub fn final_regret(&self) -> f64 {
        self.batches.last().map_or(0.0, |b| b.cumulative_regret)
    }

    /// Cumulative regret after `n` batches (1-based count).
    pub fn regret_after(&self, n: usize) -> f64 {
        self.batches[n - 1].cumulative_regret
    }
}

/// Monte Carlo posterior probability that each arm is the best.
///
/// Draws one value per arm per round from per-arm keyed streams, records
/// the argmax (exact ties resolved uniformly via a keyed hash), and
/// normalizes the win counts.
pub fn best_arm_distribution(
    posteriors: &[BetaParams],
    n_draws: usize,
    factory: &StreamFactory,
    replication: u64,
    batch: u32,
    lanes: &[u64],
) -> Vec<f64> {
    assert!(posteriors.len() >= 2, "need at least 2 arms");
    assert!(n_draws >= 1, "need at least one draw");
    assert_eq!(posteriors.len(), lanes.len());

    let mut best_value = vec![f64::NEG_INFINITY; n_draws];
    let mut best_arm = vec![usize::MAX; n_draws];
    for (arm, (params, &lane)) in posteriors.iter().zip(lanes).enumerate() {
        let mut rng = factory.stream(replication, batch, Stage::PosteriorDraw, lane);
        let dist = BetaDist::new(params.alpha(), params.beta()).expect("valid beta shapes");
        for draw in 0..n_draws {
            let value = dist.sample(&mut rng);
            if value > best_value[draw] {
                best_value[draw] = value;
                best_arm[draw] = arm;
            } else if value == best_value[draw] {
                let incumbent = lanes[best_arm[draw]];
                let old = factory.tie_hash(replication, batch, 2 * draw as u64, incumbent);
                let new = factory.tie_hash(replication, batch, 2 * draw as u64, lane);
                if new > old {
                    best_arm[draw] = arm;
                }
            }
        }
    }

    let mut counts = vec![0u64; posteriors.len()];
    for &winner in &best_arm {
        counts[winner] += 1;
    }
    counts
        .iter()
        .map(|&c| c as f64 / n_draws as f64)
        .collect()
}

/// Multinomial allocation of `batch_size` units across arms.
///
/// Each unit independently picks the arm maximizing
/// `ln p_k + Gumbel(key)`, with the Gumbel noise keyed per (arm, unit);
/// the counts are exactly multinomial and permuting arms permutes them.
pub fn allocate_batch(
    probs: &[f64],
    batch_size: u64,
    factory: &StreamFactory,
    replication: u64,
    batch: u32,
    lanes: &[u64],
) -> Vec<u64> {
    let total: f64 = probs.iter().sum();
    assert!(
        (total - 1.0).abs() <= 1e-9,
        "allocation probabilities sum to {total}"
    );
    assert_eq!(probs.len(), lanes.len());

    let log_probs: Vec<f64> = probs
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut counts = vec![0u64; probs.len()];
    for unit in 0..batch_size {
        let mut best_score = f64::NEG_INFINITY;
        let mut winner = usize::MAX;
        for (arm, (&lp, &lane)) in log_probs.iter().zip(lanes).enumerate() {
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let u = factory.unit_uniform(replication, batch, Stage::Allocation, lane, unit);
            let score = lp - (-u.ln()).ln();
            if score > best_score {
                best_score = score;
                winner = arm;
            } else if score == best_score {
                let old = factory.tie_hash(replication, batch, 2 * unit + 1, lanes[winner]);
                let new = factory.tie_hash(replication, batch, 2 * unit + 1, lane);
                if new > old {
                    winner = arm;
                }
            }
        }
        counts[winner] += 1;
    }
    counts
}

/// Simulates one Thompson-sampling run under the configured prior mode.
pub fn simulate_bandit(truth: &GroundTruth, config: &BanditConfig) -> Result<BanditTrajectory> {
    config.validate()?;
    if truth.len() < 2 {
        return Err(Error::TooFewArms {
            found: truth.len(),
            min: 2,
        });
    }
    let factory = StreamFactory::new(config.seed);
    Ok(simulate_replication(
        truth,
        config,
        &factory,
        0,
        config.prior_mode,
    ))
}

fn simulate_replication(
    truth: &GroundTruth,
    config: &BanditConfig,
    factory: &StreamFactory,
    replication: u64,
    mode: PriorMode,
) -> BanditTrajectory {
    let k = truth.len();
    let lanes = &truth.lanes;
    let best_mean = truth.best_mean();
    let top_j = config.top_j.min(k);

    let mut successes = vec![0u64; k];
    let mut failures = vec![0u64; k];
    let mut plays = vec![0u64; k];
    let mut last_successes = vec![0u64; k];
    let mut last_plays = vec![0u64; k];

    let mut cumulative_regret = 0.0;
    let mut batches = Vec::with_capacity(config.n_batches);

    for batch in 0..config.n_batches {
        let batch_id = batch as u32;
        let (posteriors, prior_fallback) = match mode {
            PriorMode::Uniform => {
                let posts = (0..k)
                    .map(|i| posterior(&BetaParams::uniform(), successes[i], failures[i]))
                    .collect::<Vec<_>>();
                (posts, false)
            }
            PriorMode::EmpiricalBayes => {
                let means: Vec<f64> = match config.refit_scope {
                    RefitScope::Cumulative => (0..k)
                        .filter(|&i| plays[i] > 0)
                        .map(|i| successes[i] as f64 / plays[i] as f64)
                        .collect(),
                    RefitScope::LastBatch => (0..k)
                        .filter(|&i| last_plays[i] > 0)
                        .map(|i| last_successes[i] as f64 / last_plays[i] as f64)
                        .collect(),
                };
                // Until two arms have data (or when the observed means are
                // degenerate) the fit is undefined; sampling still has to
                // proceed, so fall back to the uniform prior and flag it.
                let (prior, fallback) = if means.len() < 2 {
                    (BetaParams::uniform(), true)
                } else {
                    match fit_beta(&means) {
                        Ok(fit) => (fit.params, fit.fallback_uniform),
                        Err(Error::DegenerateInput(_)) => (BetaParams::uniform(), true),
                        Err(e) => unreachable!("beta fit on valid means failed: {e}"),
                    }
                };
                let posts = (0..k)
                    .map(|i| posterior(&prior, successes[i], failures[i]))
                    .collect::<Vec<_>>();
                (posts, fallback)
            }
        };

        let allocation = best_arm_distribution(
            &posteriors,
            config.n_posterior_draws,
            factory,
            replication,
            batch_id,
            lanes,
        );
        let batch_plays = allocate_batch(
            &allocation,
            config.batch_size,
            factory,
            replication,
            batch_id,
            lanes,
        );

        let mut batch_successes = vec![0u64; k];
        for arm in 0..k {
            if batch_plays[arm] == 0 {
                continue;
            }
            let mut rng = factory.stream(replication, batch_id, Stage::Reward, lanes[arm]);
            let dist = Binomial::new(batch_plays[arm], truth.true_means[arm])
                .expect("valid binomial parameters");
            batch_successes[arm] = dist.sample(&mut rng);
        }

        // Expected-reward regret, summed in lane order so that permuting
        // the arm order reproduces the same floating-point value.
        let mut regret_terms: Vec<(u64, f64)> = (0..k)
            .map(|arm| {
                (
                    lanes[arm],
                    batch_plays[arm] as f64 * (best_mean - truth.true_means[arm]),
                )
            })
            .collect();
        regret_terms.sort_unstable_by_key(|&(lane, _)| lane);
        cumulative_regret += regret_terms.iter().map(|&(_, t)| t).sum::<f64>();

        for arm in 0..k {
            plays[arm] += batch_plays[arm];
            successes[arm] += batch_successes[arm];
            failures[arm] += batch_plays[arm] - batch_successes[arm];
        }
        last_plays.copy_from_slice(&batch_plays);
        last_successes.copy_from_slice(&batch_successes);

        batches.push(BatchRecord {
            best_arm_probability: allocation[truth.best],
            top_rank_mass: truth.ranks[..top_j]
                .iter()
                .map(|&i| allocation[i])
                .collect(),
            allocation,
            plays: batch_plays,
            successes: batch_successes,
            cumulative_regret,
            prior_fallback,
        });
    }

    BanditTrajectory { batches }
}

/// Regret percentiles over replications (2.5, 50, 97.5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercentileTriple {
    pub p2_5: f64,
    pub p50: f64,
    pub p97_5: f64,
}

impl PercentileTriple {
    fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            p2_5: percentile_sorted(&sorted, 0.025),
            p50: percentile_sorted(&sorted, 0.5),
            p97_5: percentile_sorted(&sorted, 0.975),
        }
    }
}

/// Summary of one prior mode over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: PriorMode,
    pub regret_early: PercentileTriple,
    pub regret_end: PercentileTriple,
    pub best_arm_rate_early: f64,
    pub best_arm_rate_end: f64,
    /// Mean allocation mass of the rank-j arm per batch: `[batch][rank]`.
    pub top_rank_mass: Vec<Vec<f64>>,
    /// Final cumulative regret per replication, in replication order.
    pub final_regrets: Vec<f64>,
    /// Cumulative regret at the early checkpoint per replication.
    pub early_regrets: Vec<f64>,
    /// Batches in which the prior fit fell back to uniform.
    pub prior_fallback_batches: u64,
}

/// Paired comparison of the two prior modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub n_replications: usize,
    pub early_batches: usize,
    pub n_batches: usize,
    pub empirical_bayes: ModeSummary,
    pub uniform: ModeSummary,
    /// Relative change (EB - Uniform) / Uniform of the regret percentiles;
    /// absent when a Uniform percentile is zero.
    pub regret_change_early: Option<PercentileTriple>,
    pub regret_change_end: Option<PercentileTriple>,
    /// Set when a relative change was undefined (zero baseline regret);
    /// the absolute percentiles above remain valid.
    pub degenerate_regret: bool,
}

/// Runs `n_replications` of a single mode with keyed replication streams.
pub fn run_mode(
    truth: &GroundTruth,
    config: &BanditConfig,
    n_replications: usize,
    mode: PriorMode,
) -> Result<ModeSummary> {
    config.validate()?;
    if truth.len() < 2 {
        return Err(Error::TooFewArms {
            found: truth.len(),
            min: 2,
        });
    }
    if n_replications == 0 {
        return Err(Error::InvalidInput(
            "need at least one replication".into(),
        ));
    }
    let factory = StreamFactory::new(config.seed);
    let outcomes: Vec<BanditTrajectory> = (0..n_replications as u64)
        .into_par_iter()
        .map(|rep| simulate_replication(truth, config, &factory, rep, mode))
        .collect();
    Ok(summarize_mode(&outcomes, config, mode))
}

/// Runs both prior modes with paired replication streams and compares.
pub fn compare_methods(
    truth: &GroundTruth,
    config: &BanditConfig,
    n_replications: usize,
) -> Result<ComparisonReport> {
    config.validate()?;
    if truth.len() < 2 {
        return Err(Error::TooFewArms {
            found: truth.len(),
            min: 2,
        });
    }
    if n_replications < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 replications for a comparison, got {n_replications}"
        )));
    }
    let factory = StreamFactory::new(config.seed);
    let pairs: Vec<(BanditTrajectory, BanditTrajectory)> = (0..n_replications as u64)
        .into_par_iter()
        .map(|rep| {
            (
                simulate_replication(truth, config, &factory, rep, PriorMode::EmpiricalBayes),
                simulate_replication(truth, config, &factory, rep, PriorMode::Uniform),
            )
        })
        .collect();
    let (eb, uni): (Vec<BanditTrajectory>, Vec<BanditTrajectory>) = pairs.into_iter().unzip();
    let eb = summarize_mode(&eb, config, PriorMode::EmpiricalBayes);
    let uni = summarize_mode(&uni, config, PriorMode::Uniform);

    let change_early = relative_change(&eb.regret_early, &uni.regret_early);
    let change_end = relative_change(&eb.regret_end, &uni.regret_end);
    let degenerate = change_early.is_none() || change_end.is_none();
    Ok(ComparisonReport {
        n_replications,
        early_batches: config.early_batches(),
        n_batches: config.n_batches,
        empirical_bayes: eb,
        uniform: uni,
        regret_change_early: change_early,
        regret_change_end: change_end,
        degenerate_regret: degenerate,
    })
}

fn summarize_mode(
    trajectories: &[BanditTrajectory],
    config: &BanditConfig,
    mode: PriorMode,
) -> ModeSummary {
    let early = config.early_batches();
    let n = trajectories.len() as f64;
    let early_regrets: Vec<f64> = trajectories.iter().map(|t| t.regret_after(early)).collect();
    let final_regrets: Vec<f64> = trajectories.iter().map(BanditTrajectory::final_regret).collect();

    let top_j = trajectories[0].batches[0].top_rank_mass.len();
    let mut top_rank_mass = vec![vec![0.0; top_j]; config.n_batches];
    let mut fallbacks = 0u64;
    for t in trajectories {
        for (b, record) in t.batches.iter().enumerate() {
            for (j, &mass) in record.top_rank_mass.iter().enumerate() {
                top_rank_mass[b][j] += mass;
            }
            fallbacks += record.prior_fallback as u64;
        }
    }
    for row in &mut top_rank_mass {
        for value in row {
            *value /= n;
        }
    }

    ModeSummary {
        mode,
        regret_early: PercentileTriple::from_values(&early_regrets),
        regret_end: PercentileTriple::from_values(&final_regrets),
        best_arm_rate_early: trajectories
            .iter()
            .map(|t| t.batches[early - 1].best_arm_probability)
            .sum::<f64>()
            / n,
        best_arm_rate_end: trajectories
            .iter()
            .map(|t| t.batches.last().unwrap().best_arm_probability)
            .sum::<f64>()
            / n,
        top_rank_mass,
        final_regrets,
        early_regrets,
        prior_fallback_batches: fallbacks,
    }
}

fn relative_change(eb: &PercentileTriple, uni: &PercentileTriple) -> Option<PercentileTriple> {
    if uni.p2_5 == 0.0 || uni.p50 == 0.0 || uni.p97_5 == 0.0 {
        return None;
    }
    Some(PercentileTriple {
        p2_5: (eb.p2_5 - uni.p2_5) / uni.p2_5,
        p50: (eb.p50 - uni.p50) / uni.p50,
        p97_5: (eb.p97_5 - uni.p97_5) / uni.p97_5,
    })
}

/// Linear-interpolation percentile of pre-sorted values (type 7).
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factory() -> StreamFactory {
        StreamFactory::new(12345)
    }

    fn lanes_for(n: usize) -> Vec<u64> {
        (0..n).map(|i| hash_label(&format!("arm_{i}"))).collect()
    }

    #[test]
    fn identical_posteriors_split_evenly() {
        let posts = vec![BetaParams::new(3.0, 7.0).unwrap(); 2];
        let n_draws = 20_000;
        let probs = best_arm_distribution(&posts, n_draws, &factory(), 0, 0, &lanes_for(2));
        let mc_sd = (0.25 / n_draws as f64).sqrt();
        assert!((probs[0] - 0.5).abs() < 3.0 * mc_sd, "{probs:?}");
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_posteriors_are_decisive() {
        let posts = vec![
            BetaParams::new(1000.0, 1.0).unwrap(),
            BetaParams::new(1.0, 1000.0).unwrap(),
        ];
        let probs = best_arm_distribution(&posts, 20_000, &factory(), 0, 0, &lanes_for(2));
        assert!(probs[0] > 0.999, "{probs:?}");
    }

    #[test]
    fn win_probability_matches_numeric_integration() {
        // Joint density of (Beta(2,1), Beta(1,1)) integrated over x > y by
        // midpoint rule; the Monte Carlo estimate must agree.
        let cells = 2000;
        let mut oracle = 0.0;
        for i in 0..cells {
            let x = (i as f64 + 0.5) / cells as f64;
            let fx = 2.0 * x;
            for j in 0..cells {
                let y = (j as f64 + 0.5) / cells as f64;
                if x > y {
                    oracle += fx;
                }
            }
        }
        oracle /= (cells * cells) as f64;
        assert!((oracle - 2.0 / 3.0).abs() < 1e-3, "oracle {oracle}");

        let posts = vec![
            BetaParams::new(2.0, 1.0).unwrap(),
            BetaParams::new(1.0, 1.0).unwrap(),
        ];
        let n_draws = 200_000;
        let probs = best_arm_distribution(&posts, n_draws, &factory(), 0, 0, &lanes_for(2));
        let mc_sd = (oracle * (1.0 - oracle) / n_draws as f64).sqrt();
        assert!(
            (probs[0] - oracle).abs() < 3.0 * mc_sd + 1e-3,
            "mc {} vs oracle {oracle}",
            probs[0]
        );
    }

    #[test]
    fn point_mass_allocates_everything() {
        let counts = allocate_batch(&[1.0, 0.0], 100, &factory(), 0, 0, &lanes_for(2));
        assert_eq!(counts, vec![100, 0]);
    }

    #[test]
    fn allocation_conserves_batch_size() {
        let k = 5;
        let probs = vec![1.0 / k as f64; k];
        let counts = allocate_batch(&probs, 5 * 137, &factory(), 0, 0, &lanes_for(k));
        assert_eq!(counts.iter().sum::<u64>(), 5 * 137);
    }

    #[test]
    fn even_split_is_binomially_plausible() {
        let counts = allocate_batch(&[0.5, 0.5], 10_000, &factory(), 0, 0, &lanes_for(2));
        let sd = (10_000.0_f64 * 0.25).sqrt();
        assert!(
            (counts[0] as f64 - 5000.0).abs() < 4.0 * sd,
            "counts {counts:?}"
        );
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let truth = GroundTruth::from_means(vec![0.03, 0.02, 0.025, 0.021]).unwrap();
        let config = BanditConfig {
            n_batches: 5,
            batch_size: 200,
            n_posterior_draws: 500,
            seed: 7,
            ..BanditConfig::default()
        };
        let a = simulate_bandit(&truth, &config).unwrap();
        let b = simulate_bandit(&truth, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_means_accrue_zero_regret() {
        let truth = GroundTruth::from_means(vec![0.4; 3]).unwrap();
        let config = BanditConfig {
            n_batches: 4,
            batch_size: 100,
            n_posterior_draws: 300,
            ..BanditConfig::default()
        };
        let trajectory = simulate_bandit(&truth, &config).unwrap();
        for b in &trajectory.batches {
            assert_eq!(b.cumulative_regret, 0.0);
        }
    }

    #[test]
    fn regret_is_nondecreasing_and_allocation_normalized() {
        let truth = GroundTruth::from_means(vec![0.031, 0.019, 0.025, 0.027, 0.022]).unwrap();
        let config = BanditConfig {
            n_batches: 8,
            batch_size: 300,
            n_posterior_draws: 800,
            seed: 3,
            ..BanditConfig::default()
        };
        let trajectory = simulate_bandit(&truth, &config).unwrap();
        let mut last = 0.0;
        for b in &trajectory.batches {
            assert!(b.cumulative_regret >= last);
            last = b.cumulative_regret;
            let total: f64 = b.allocation.iter().sum();
            assert!((total - 1.0).abs() <= 1e-9);
            assert_eq!(b.plays.iter().sum::<u64>(), 300);
        }
    }

    #[test]
    fn first_batch_falls_back_to_uniform_prior() {
        let truth = GroundTruth::from_means(vec![0.3, 0.2]).unwrap();
        let config = BanditConfig {
            n_batches: 1,
            batch_size: 50,
            n_posterior_draws: 200,
            prior_mode: PriorMode::EmpiricalBayes,
            ..BanditConfig::default()
        };
        let trajectory = simulate_bandit(&truth, &config).unwrap();
        assert!(trajectory.batches[0].prior_fallback);
    }

    #[test]
    fn permuting_arm_order_permutes_outputs_exactly() {
        let ids = ["alpha", "bravo", "charlie", "delta"];
        let means = [0.021, 0.027, 0.027, 0.024];
        let truth_fwd = GroundTruth::new(
            ids.iter().map(|s| s.to_string()).collect(),
            means.to_vec(),
        )
        .unwrap();
        let perm = [2usize, 0, 3, 1];
        let truth_perm = GroundTruth::new(
            perm.iter().map(|&i| ids[i].to_string()).collect(),
            perm.iter().map(|&i| means[i]).collect(),
        )
        .unwrap();
        let config = BanditConfig {
            n_batches: 6,
            batch_size: 120,
            n_posterior_draws: 400,
            seed: 99,
            ..BanditConfig::default()
        };
        let fwd = simulate_bandit(&truth_fwd, &config).unwrap();
        let prm = simulate_bandit(&truth_perm, &config).unwrap();
        for (bf, bp) in fwd.batches.iter().zip(&prm.batches) {
            for (new_pos, &old_pos) in perm.iter().enumerate() {
                assert_eq!(bf.allocation[old_pos], bp.allocation[new_pos]);
                assert_eq!(bf.plays[old_pos], bp.plays[new_pos]);
                assert_eq!(bf.successes[old_pos], bp.successes[new_pos]);
            }
            assert_eq!(bf.cumulative_regret, bp.cumulative_regret);
        }
    }

    #[test]
    fn degenerate_truth_flags_relative_change() {
        let truth = GroundTruth::from_means(vec![0.25, 0.25, 0.25]).unwrap();
        let config = BanditConfig {
            n_batches: 3,
            batch_size: 80,
            n_posterior_draws: 200,
            ..BanditConfig::default()
        };
        let report = compare_methods(&truth, &config, 4).unwrap();
        assert!(report.degenerate_regret);
        assert!(report.regret_change_end.is_none());
        assert_eq!(report.empirical_bayes.regret_end.p50, 0.0);
        assert_eq!(report.uniform.regret_end.p50, 0.0);
        assert_eq!(
            report.empirical_bayes.final_regrets.len(),
            report.uniform.final_regrets.len()
        );
    }

    #[test]
    fn percentiles_interpolate_linearly() {
        let values = vec![4.0, 1.0, 2.0, 3.0];
        let t = PercentileTriple::from_values(&values);
        assert!((t.p50 - 2.5).abs() < 1e-12);
        assert!((t.p2_5 - 1.075).abs() < 1e-12);
        assert!((t.p97_5 - 3.925).abs() < 1e-12);
    }
}
