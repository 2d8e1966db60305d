//! Command-line front end: estimation tables, bootstrap studies, and
//! bandit simulation campaigns over CSV inputs, with deterministic
//! reports that embed their run manifest.

mod bandit_cmd;
mod error;
mod estimate;
mod io;
mod manifest;
mod static_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use armshrink::bandit::{BanditConfig, PriorMode, RefitScope};
use armshrink::estimator::{DofStyle, SigmaMode, VarianceForm};
use armshrink::staticsim::StaticConfig;
use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

/// Environment variable naming the default worker thread count for the
/// simulation commands; the --threads flag overrides it. Thread count
/// never changes results, only wall time.
const THREADS_ENV: &str = "ARMSHRINK_THREADS";

#[derive(Parser)]
#[command(
    name = "armshrink",
    version,
    about = "Shrinkage estimation and bandit simulation for many-armed experiments"
)]
struct Cli {
    /// Worker threads for simulations (default: ARMSHRINK_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-arm shrinkage estimates from an experiment summary CSV
    Estimate {
        /// Input CSV (arm_id,n,successes or arm_id,n,mean,std_err)
        #[arg(long)]
        input: PathBuf,
        /// Two-sided confidence level
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Degrees-of-freedom convention for the shrinkage factor
        #[arg(long, value_enum, default_value_t = DofArg::K3)]
        dof: DofArg,
        /// Which variance estimator fills the report's variance column
        #[arg(long, value_enum, default_value_t = VarianceArg::Appendix)]
        variance: VarianceArg,
        /// Per-arm sampling variances or their cross-arm average
        #[arg(long, value_enum, default_value_t = SigmaArg::PerArm)]
        sigma: SigmaArg,
        /// Report format
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parametric-bootstrap accuracy and coverage study over a scenario
    #[command(name = "static-sim")]
    StaticSim {
        /// Ground-truth scenario CSV
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        replications: usize,
        /// Fraction of each arm's sample the bootstrap keeps
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated arm counts for the subsampling curve
        #[arg(long, value_delimiter = ',')]
        arms_curve: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = DofArg::K3)]
        dof: DofArg,
        /// Full-variance form backing the intervals
        #[arg(long, value_enum, default_value_t = VarianceFormArg::Appendix)]
        variance: VarianceFormArg,
        #[arg(long, value_enum, default_value_t = SigmaArg::PerArm)]
        sigma: SigmaArg,
        /// Directory receiving report.json and the figure CSV series
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Batch Thompson-sampling study over a Bernoulli scenario
    #[command(name = "bandit-sim")]
    BanditSim {
        /// Ground-truth scenario CSV (means are conversion probabilities)
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        batches: usize,
        #[arg(long)]
        batch_size: u64,
        /// Monte Carlo posterior draws per allocation (>= 10000 for reported runs)
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long)]
        replications: usize,
        #[arg(long, value_enum, default_value_t = PriorArg::Both)]
        prior: PriorArg,
        /// Observations the per-batch prior refit sees
        #[arg(long, value_enum, default_value_t = RefitArg::Cumulative)]
        refit: RefitArg,
        #[arg(long, default_value_t = 0.25)]
        early_fraction: f64,
        /// Track allocation mass on the top-J true arms
        #[arg(long, default_value_t = 6)]
        top_j: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving report.json and the figure CSV series
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Re-derive the input digests recorded in a report's manifest
    Verify {
        /// A report.json or CSV report produced by this tool
        report: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DofArg {
    #[value(name = "k-3")]
    K3,
    #[value(name = "k-1")]
    K1,
}

impl From<DofArg> for DofStyle {
    fn from(value: DofArg) -> Self {
        match value {
            DofArg::K3 => DofStyle::KMinus3,
            DofArg::K1 => DofStyle::KMinus1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceArg {
    Appendix,
    MainText,
    Naive,
    Mixture,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceFormArg {
    Appendix,
    MainText,
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaArg {
    PerArm,
    Pooled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Both,
    Eb,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefitArg {
    Cumulative,
    LastBatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let from_env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(n) = flag.or(from_env) {
        if n > 0 {
            // Ignore failure: the pool can only be configured once.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Estimate {
            input,
            level,
            dof,
            variance,
            sigma,
            format,
            out,
        } => {
            let params = estimate::EstimateParams {
                level,
                dof_style: dof.into(),
                variance: match variance {
                    VarianceArg::Appendix => estimate::VarianceChoice::Appendix,
                    VarianceArg::MainText => estimate::VarianceChoice::MainText,
                    VarianceArg::Naive => estimate::VarianceChoice::Naive,
                    VarianceArg::Mixture => estimate::VarianceChoice::Mixture,
                },
                sigma_mode: match sigma {
                    SigmaArg::PerArm => SigmaMode::PerArm,
                    SigmaArg::Pooled => SigmaMode::Pooled,
                },
                json_format: matches!(format, FormatArg::Json),
            };
            let text = estimate::run(&input, &params)?;
            match out {
                Some(path) => io::write_file(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::StaticSim {
            scenario,
            replications,
            fraction,
            level,
            seed,
            arms_curve,
            dof,
            variance,
            sigma,
            out_dir,
        } => {
            let config = StaticConfig {
                downsample_fraction: fraction,
                n_replications: replications,
                level,
                seed,
                subsample_arm_counts: arms_curve,
                dof_style: dof.into(),
                variance_form: match variance {
                    VarianceFormArg::Appendix => VarianceForm::Appendix,
                    VarianceFormArg::MainText => VarianceForm::MainText,
                },
                sigma_mode: match sigma {
                    SigmaArg::PerArm => SigmaMode::PerArm,
                    SigmaArg::Pooled => SigmaMode::Pooled,
                },
            };
            for name in static_cmd::run(&scenario, &config, &out_dir)? {
                println!("wrote {}", out_dir.join(name).display());
            }
            Ok(())
        }
        Command::BanditSim {
            scenario,
            batches,
            batch_size,
            draws,
            replications,
            prior,
            refit,
            early_fraction,
            top_j,
            seed,
            out_dir,
        } => {
            let config = BanditConfig {
                batch_size,
                n_batches: batches,
                n_posterior_draws: draws,
                prior_mode: PriorMode::EmpiricalBayes,
                refit_scope: match refit {
                    RefitArg::Cumulative => RefitScope::Cumulative,
                    RefitArg::LastBatch => RefitScope::LastBatch,
                },
                seed,
                early_fraction,
                top_j,
            };
            let prior = match prior {
                PriorArg::Both => bandit_cmd::PriorChoice::Both,
                PriorArg::Eb => bandit_cmd::PriorChoice::EmpiricalBayes,
                PriorArg::Uniform => bandit_cmd::PriorChoice::Uniform,
            };
            for name in bandit_cmd::run(&scenario, &config, replications, prior, &out_dir)? {
                println!("wrote {}", out_dir.join(name).display());
            }
            Ok(())
        }
        Command::Verify { report } => verify(&report),
    }
}

fn verify(report: &std::path::Path) -> CliResult<()> {
    let manifest = manifest::manifest_from_report(report)?;
    for input in &manifest.inputs {
        let path = std::path::Path::new(&input.path);
        let digest = manifest::digest_file(path)?;
        if digest != input.sha256 {
            return Err(CliError::Validation(format!(
                "digest mismatch for {}: manifest {}, current {digest}",
                input.path, input.sha256
            )));
        }
        println!("ok {}", input.path);
    }
    println!(
        "verified {} input(s) for {} v{}",
        manifest.inputs.len(),
        manifest.command,
        manifest.version
    );
    Ok(())
}
