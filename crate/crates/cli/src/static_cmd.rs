//! `static-sim`: bootstrap accuracy/coverage study over a scenario file,
//! emitting a JSON report plus plot-ready CSV data series.

use std::path::Path;

use armshrink::staticsim::{run_static_study, StaticConfig, StaticReport};
use serde::Serialize;
use serde_json::json;

use crate::error::CliResult;
use crate::io::{self, read_scenario};
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct FullReport {
    manifest: RunManifest,
    #[serde(flatten)]
    report: StaticReport,
}

pub fn run(scenario: &Path, config: &StaticConfig, out_dir: &Path) -> CliResult<Vec<String>> {
    let truth = read_scenario(scenario)?;
    let report = run_static_study(&truth, config)?;

    let manifest_config = json!({
        "scenario": scenario.display().to_string(),
        "replications": config.n_replications,
        "fraction": config.downsample_fraction,
        "level": config.level,
        "seed": config.seed,
        "arms_curve": config.subsample_arm_counts,
        "dof": config.dof_style.label(),
        "variance": config.variance_form.label(),
        "sigma": config.sigma_mode.label(),
    });
    let manifest = RunManifest::new("static-sim", Some(config.seed), manifest_config, &[scenario])?;

    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> CliResult<()> {
        io::write_file(&out_dir.join(name), &contents)?;
        written.push(name.to_string());
        Ok(())
    };

    emit(
        "report.json",
        io::to_report_json(&FullReport {
            manifest,
            report: report.clone(),
        })?,
    )?;

    // fig3: shrinkage profile (one bootstrap replication).
    let mut fig3 = String::from("arm_id,raw_effect,shrunk_effect\n");
    for p in &report.shrinkage_profile {
        fig3.push_str(&format!(
            "{},{},{}\n",
            p.arm_id,
            io::fmt_num(p.raw_effect),
            io::fmt_num(p.shrunk_effect)
        ));
    }
    emit("fig3.csv", fig3)?;

    // fig4: compound error comparison.
    let c = &report.compound;
    emit(
        "fig4.csv",
        format!(
            "mse_js,se_js,mse_raw,se_raw,ratio,ratio_se\n{},{},{},{},{},{}\n",
            io::fmt_num(c.mse_js),
            io::fmt_num(c.se_js),
            io::fmt_num(c.mse_raw),
            io::fmt_num(c.se_raw),
            io::fmt_opt(c.ratio),
            io::fmt_opt(c.ratio_se),
        ),
    )?;

    // fig5: per-arm error ratios against standardized effect.
    let mut fig5 = String::from("arm_id,standardized_effect,mse_ratio\n");
    for row in &report.per_arm {
        fig5.push_str(&format!(
            "{},{},{}\n",
            row.arm_id,
            io::fmt_num(row.standardized_effect),
            io::fmt_opt(row.mse_ratio)
        ));
    }
    emit("fig5.csv", fig5)?;

    // fig6: error ratio versus arm count, when the curve was requested.
    if let Some(curve) = &report.curve {
        let mut fig6 = String::from("k,ratio,se\n");
        for p in curve {
            fig6.push_str(&format!(
                "{},{},{}\n",
                p.k,
                io::fmt_opt(p.ratio),
                io::fmt_opt(p.se)
            ));
        }
        emit("fig6.csv", fig6)?;
    }

    // fig7: per-arm coverage.
    let mut fig7 = String::from(
        "arm_id,standardized_effect,coverage_raw,coverage_raw_se,coverage_js,coverage_js_se\n",
    );
    for row in &report.per_arm {
        fig7.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.arm_id,
            io::fmt_num(row.standardized_effect),
            io::fmt_num(row.coverage_raw),
            io::fmt_num(row.coverage_raw_se),
            io::fmt_num(row.coverage_js),
            io::fmt_num(row.coverage_js_se),
        ));
    }
    emit("fig7.csv", fig7)?;

    Ok(written)
}
