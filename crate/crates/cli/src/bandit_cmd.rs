//! `bandit-sim`: batch Thompson-sampling study over a Bernoulli scenario,
//! comparing empirical-Bayes and uniform priors (or running one mode).

use std::path::Path;

use armshrink::bandit::{
    compare_methods, run_mode, BanditConfig, ComparisonReport, GroundTruth, ModeSummary,
    PercentileTriple, PriorMode,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::io::{self, read_scenario};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorChoice {
    Both,
    EmpiricalBayes,
    Uniform,
}

impl PriorChoice {
    pub fn label(self) -> &'static str {
        match self {
            PriorChoice::Both => "both",
            PriorChoice::EmpiricalBayes => "eb",
            PriorChoice::Uniform => "uniform",
        }
    }
}

#[derive(Serialize)]
struct ComparisonFile {
    manifest: RunManifest,
    #[serde(flatten)]
    report: ComparisonReport,
}

#[derive(Serialize)]
struct SingleModeFile {
    manifest: RunManifest,
    n_replications: usize,
    early_batches: usize,
    n_batches: usize,
    summary: ModeSummary,
}

pub fn run(
    scenario: &Path,
    config: &BanditConfig,
    n_replications: usize,
    prior: PriorChoice,
    out_dir: &Path,
) -> CliResult<Vec<String>> {
    let truth_arms = read_scenario(scenario)?;
    let ids: Vec<String> = truth_arms.iter().map(|t| t.arm_id.clone()).collect();
    let means: Vec<f64> = truth_arms.iter().map(|t| t.mean).collect();
    let truth = GroundTruth::new(ids, means).map_err(|e| {
        CliError::Validation(format!("{}: {e}", scenario.display()))
    })?;

    let manifest_config = json!({
        "scenario": scenario.display().to_string(),
        "replications": n_replications,
        "batches": config.n_batches,
        "batch_size": config.batch_size,
        "draws": config.n_posterior_draws,
        "prior": prior.label(),
        "refit": match config.refit_scope {
            armshrink::bandit::RefitScope::Cumulative => "cumulative",
            armshrink::bandit::RefitScope::LastBatch => "last-batch",
        },
        "early_fraction": config.early_fraction,
        "top_j": config.top_j,
        "seed": config.seed,
    });
    let manifest = RunManifest::new("bandit-sim", Some(config.seed), manifest_config, &[scenario])?;

    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> CliResult<()> {
        io::write_file(&out_dir.join(name), &contents)?;
        written.push(name.to_string());
        Ok(())
    };

    match prior {
        PriorChoice::Both => {
            let report = compare_methods(&truth, config, n_replications)?;
            emit(
                "report.json",
                io::to_report_json(&ComparisonFile {
                    manifest,
                    report: report.clone(),
                })?,
            )?;
            emit("fig8.csv", fig8(&report))?;
            emit("fig9.csv", fig9(&report))?;
            emit("fig10.csv", fig10(&report))?;
        }
        PriorChoice::EmpiricalBayes | PriorChoice::Uniform => {
            let mode = match prior {
                PriorChoice::EmpiricalBayes => PriorMode::EmpiricalBayes,
                _ => PriorMode::Uniform,
            };
            let summary = run_mode(&truth, config, n_replications, mode)?;
            emit(
                "report.json",
                io::to_report_json(&SingleModeFile {
                    manifest,
                    n_replications,
                    early_batches: config.early_batches(),
                    n_batches: config.n_batches,
                    summary,
                })?,
            )?;
        }
    }

    Ok(written)
}

fn fig8(report: &ComparisonReport) -> String {
    let mut out = String::from("checkpoint,percentile,regret_eb,regret_uniform,relative_change\n");
    let rows: [(&str, &PercentileTriple, &PercentileTriple, &Option<PercentileTriple>); 2] = [
        (
            "early",
            &report.empirical_bayes.regret_early,
            &report.uniform.regret_early,
            &report.regret_change_early,
        ),
        (
            "end",
            &report.empirical_bayes.regret_end,
            &report.uniform.regret_end,
            &report.regret_change_end,
        ),
    ];
    for (name, eb, uni, change) in rows {
        let cells = [
            ("2.5", eb.p2_5, uni.p2_5, change.map(|c| c.p2_5)),
            ("50", eb.p50, uni.p50, change.map(|c| c.p50)),
            ("97.5", eb.p97_5, uni.p97_5, change.map(|c| c.p97_5)),
        ];
        for (pct, e, u, c) in cells {
            out.push_str(&format!(
                "{name},{pct},{},{},{}\n",
                io::fmt_num(e),
                io::fmt_num(u),
                io::fmt_opt(c),
            ));
        }
    }
    out
}

fn fig9(report: &ComparisonReport) -> String {
    format!(
        "checkpoint,best_arm_rate_eb,best_arm_rate_uniform\nearly,{},{}\nend,{},{}\n",
        io::fmt_num(report.empirical_bayes.best_arm_rate_early),
        io::fmt_num(report.uniform.best_arm_rate_early),
        io::fmt_num(report.empirical_bayes.best_arm_rate_end),
        io::fmt_num(report.uniform.best_arm_rate_end),
    )
}

fn fig10(report: &ComparisonReport) -> String {
    let mut out = String::from("batch,rank,mass_eb,mass_uniform\n");
    for (b, (eb_row, uni_row)) in report
        .empirical_bayes
        .top_rank_mass
        .iter()
        .zip(&report.uniform.top_rank_mass)
        .enumerate()
    {
        for (j, (&e, &u)) in eb_row.iter().zip(uni_row).enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                b + 1,
                j + 1,
                io::fmt_num(e),
                io::fmt_num(u)
            ));
        }
    }
    out
}
