use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gamlss_boost_cli::commands::{cmd_cv, cmd_fit, cmd_simulate};
use gamlss_boost_cli::config::{
    CvConfig, FitConfig, NumberOrString, RawConfig, SimulateConfig,
};
use gamlss_boost_cli::CliError;

/// Componentwise gradient boosting for Gaussian location-scale regression.
#[derive(Parser)]
#[command(name = "gamlss-boost", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a CSV dataset for a fixed number of iterations.
    Fit(FitArgs),
    /// Choose the stopping iteration by k-fold cross-validation.
    Cv(CvArgs),
    /// Run a seeded simulation study over one or more step-length policies.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON config file; explicit flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Step-length policy: fsl, asl, saasl or saasl05 (comma list for
    /// `simulate`).
    #[arg(long)]
    policy: Option<String>,
    /// Shrinkage applied to the optimal step-length, in (0, 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed step-length used by the fsl policy.
    #[arg(long)]
    nu0: Option<f64>,
    /// Location search interval as LO:HI.
    #[arg(long, value_name = "LO:HI")]
    interval_mu: Option<String>,
    /// Scale search interval as LO:HI.
    #[arg(long, value_name = "LO:HI")]
    interval_sigma: Option<String>,
    /// Absolute line-search tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Input CSV with a header row.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Name of the response column; all other columns become covariates.
    #[arg(long, value_name = "NAME")]
    response: Option<String>,
    /// Number of boosting iterations.
    #[arg(long)]
    mstop: Option<u64>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    response: Option<String>,
    /// Maximum number of boosting iterations in the sweep.
    #[arg(long)]
    mmax: Option<String>,
    /// Number of cross-validation folds.
    #[arg(long)]
    folds: Option<u64>,
    /// Refit at the selected iteration and emit the fit outputs too.
    #[arg(long)]
    refit: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Simulation design: balanced or large-variance.
    #[arg(long)]
    design: Option<String>,
    /// Number of observations per replicate.
    #[arg(long)]
    n: Option<u64>,
    /// Number of non-informative covariates.
    #[arg(long)]
    p_ninf: Option<u64>,
    /// Number of simulation replicates.
    #[arg(long)]
    runs: Option<u64>,
    /// Maximum iterations per policy (single value or comma list matching
    /// --policy).
    #[arg(long)]
    mmax: Option<String>,
    #[arg(long)]
    folds: Option<u64>,
}

impl CommonOpts {
    fn to_raw(&self) -> RawConfig {
        RawConfig {
            command: None,
            input: None,
            response: None,
            policy: self.policy.clone(),
            lambda: self.lambda,
            nu0: self.nu0,
            interval_mu: self.interval_mu.clone(),
            interval_sigma: self.interval_sigma.clone(),
            tol: self.tol,
            mstop: None,
            mmax: None,
            folds: None,
            seed: self.seed,
            out: self.out.clone(),
            design: None,
            n: None,
            p_ninf: None,
            runs: None,
            refit: None,
        }
    }
}

fn merged_config(common: &CommonOpts, flags: RawConfig, subcommand: &str) -> Result<RawConfig, CliError> {
    let file = match &common.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    file.check_command(subcommand)?;
    Ok(file.merged_with(flags))
}

fn configure_threads() {
    if let Ok(value) = std::env::var("GAMLSSBOOST_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                // Ignore the error if a global pool already exists.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid GAMLSSBOOST_THREADS=`{value}`"),
        }
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        // Help and version are not errors.
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            print!("{e}");
            std::process::exit(0);
        }
        CliError::Usage(e.to_string())
    })?;

    configure_threads();

    match cli.command {
        Command::Fit(args) => {
            let mut flags = args.common.to_raw();
            flags.input = args.input;
            flags.response = args.response;
            flags.mstop = args.mstop;
            let raw = merged_config(&args.common, flags, "fit")?;
            cmd_fit(&FitConfig::from_raw(&raw)?)
        }
        Command::Cv(args) => {
            let mut flags = args.common.to_raw();
            flags.input = args.input;
            flags.response = args.response;
            flags.mmax = args.mmax.map(NumberOrString::Text);
            flags.folds = args.folds;
            flags.refit = if args.refit { Some(true) } else { None };
            let raw = merged_config(&args.common, flags, "cv")?;
            cmd_cv(&CvConfig::from_raw(&raw)?)
        }
        Command::Simulate(args) => {
            let mut flags = args.common.to_raw();
            flags.design = args.design;
            flags.n = args.n;
            flags.p_ninf = args.p_ninf;
            flags.runs = args.runs;
            flags.mmax = args.mmax.map(NumberOrString::Text);
            flags.folds = args.folds;
            let raw = merged_config(&args.common, flags, "simulate")?;
            cmd_simulate(&SimulateConfig::from_raw(&raw)?)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
