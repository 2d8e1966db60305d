//! Behavioral tests of the Thompson-sampling simulator: convergence of
//! the allocation estimate, decisiveness on separated arms, symmetry,
//! thread-count independence, and the directional advantage of the
//! empirical prior across scenario draws.

use armshrink::bandit::{
    allocate_batch, best_arm_distribution, compare_methods, simulate_bandit, BanditConfig,
    GroundTruth, PriorMode,
};
use armshrink::prior::BetaParams;
use armshrink::rng::{hash_label, StreamFactory};
use armshrink::scenario::beta_cluster_truth;

fn lanes(k: usize) -> Vec<u64> {
    (0..k).map(|i| hash_label(&format!("arm_{i}"))).collect()
}

#[test]
fn allocation_variance_halves_when_draws_double() {
    let posteriors = vec![
        BetaParams::new(2.0, 1.0).unwrap(),
        BetaParams::new(1.0, 1.0).unwrap(),
    ];
    let factory = StreamFactory::new(314);
    let lanes = lanes(2);
    let sizes = [256usize, 1024, 4096];
    let repeats = 200u64;

    let mut log_sizes = Vec::new();
    let mut log_vars = Vec::new();
    for (i, &n_draws) in sizes.iter().enumerate() {
        let estimates: Vec<f64> = (0..repeats)
            .map(|rep| best_arm_distribution(&posteriors, n_draws, &factory, rep, i as u32, &lanes)[0])
            .collect();
        let mean = estimates.iter().sum::<f64>() / repeats as f64;
        let var = estimates.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
        log_sizes.push((n_draws as f64).ln());
        log_vars.push(var.ln());
    }

    let x_mean = log_sizes.iter().sum::<f64>() / 3.0;
    let y_mean = log_vars.iter().sum::<f64>() / 3.0;
    let slope = log_sizes
        .iter()
        .zip(&log_vars)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum::<f64>()
        / log_sizes.iter().map(|x| (x - x_mean).powi(2)).sum::<f64>();
    assert!(
        (slope + 1.0).abs() <= 0.2,
        "log-variance slope {slope}, expected -1 +/- 0.2"
    );
}

#[test]
fn separated_arms_end_fully_allocated_under_both_priors() {
    let truth = GroundTruth::from_means(vec![0.9, 0.1]).unwrap();
    for mode in [PriorMode::EmpiricalBayes, PriorMode::Uniform] {
        let config = BanditConfig {
            batch_size: 1000,
            n_batches: 20,
            n_posterior_draws: 10_000,
            prior_mode: mode,
            seed: 8,
            ..BanditConfig::default()
        };
        let trajectory = simulate_bandit(&truth, &config).unwrap();
        let final_alloc = trajectory.batches.last().unwrap().allocation[0];
        assert!(
            final_alloc > 0.99,
            "{mode:?}: final allocation {final_alloc}"
        );
    }
}

#[test]
fn symmetric_truth_splits_best_arm_rate() {
    let truth = GroundTruth::from_means(vec![0.5, 0.5]).unwrap();
    let config = BanditConfig {
        batch_size: 200,
        n_batches: 10,
        n_posterior_draws: 1000,
        seed: 21,
        ..BanditConfig::default()
    };
    let report = compare_methods(&truth, &config, 40).unwrap();
    for rate in [
        report.empirical_bayes.best_arm_rate_end,
        report.uniform.best_arm_rate_end,
    ] {
        assert!((rate - 0.5).abs() < 0.2, "best-arm rate {rate}");
    }
}

#[test]
fn comparison_is_thread_count_independent() {
    let truth = GroundTruth::from_means(vec![0.031, 0.019, 0.025, 0.027]).unwrap();
    let config = BanditConfig {
        batch_size: 250,
        n_batches: 5,
        n_posterior_draws: 800,
        seed: 77,
        ..BanditConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compare_methods(&truth, &config, 8).unwrap())
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn empirical_prior_wins_median_regret_in_most_scenarios() {
    let mut wins = 0;
    let seeds = [1u64, 2, 3, 4, 5];
    for &seed in &seeds {
        let arms = beta_cluster_truth(20, 24.0, 936.0, 150_000, seed).unwrap();
        let truth = GroundTruth::new(
            arms.iter().map(|a| a.arm_id.clone()).collect(),
            arms.iter().map(|a| a.mean).collect(),
        )
        .unwrap();
        let config = BanditConfig {
            batch_size: 1000,
            n_batches: 25,
            n_posterior_draws: 1000,
            seed,
            ..BanditConfig::default()
        };
        let report = compare_methods(&truth, &config, 20).unwrap();
        if report.empirical_bayes.regret_end.p50 <= report.uniform.regret_end.p50 {
            wins += 1;
        }
    }
    assert!(
        wins * 10 >= seeds.len() * 6,
        "empirical prior won only {wins}/{} scenario draws",
        seeds.len()
    );
}

#[test]
fn allocation_counts_follow_probabilities() {
    let factory = StreamFactory::new(5);
    let lanes = lanes(3);
    let probs = [0.7, 0.2, 0.1];
    let counts = allocate_batch(&probs, 30_000, &factory, 0, 0, &lanes);
    assert_eq!(counts.iter().sum::<u64>(), 30_000);
    for (i, &p) in probs.iter().enumerate() {
        let expected = 30_000.0 * p;
        let sd = (30_000.0 * p * (1.0 - p)).sqrt();
        assert!(
            (counts[i] as f64 - expected).abs() < 5.0 * sd,
            "arm {i}: {} vs {expected}",
            counts[i]
        );
    }
}
