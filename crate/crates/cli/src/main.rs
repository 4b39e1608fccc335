use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod ingest;
mod report;

/// Fit Johnson SB and three-parameter Weibull distributions to diameter data.
#[derive(Parser, Debug)]
#[command(name = "sbfit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one or both models to a sample and write fit.json, traces and a density grid.
    Fit(FitArgs),
    /// Run a simulation study and write study_<name>.json.
    Experiment(ExperimentArgs),
    /// Goodness-of-fit statistics for given parameter values.
    Gof(GofArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    Jsb,
    Weibull,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bayes,
    Ml,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    NrFailure,
    Robustness,
}

macro_rules! from_str_via_value_enum {
    ($($t:ty),*) => {$(
        impl std::str::FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}
from_str_via_value_enum!(ModelChoice, Method);

#[derive(Args, Debug, Default)]
pub struct ChainFlags {
    /// Gibbs sweeps per chain [default: 10000]
    #[arg(long)]
    iterations: Option<usize>,
    /// Sweeps discarded before estimation [default: 5000]
    #[arg(long)]
    burn_in: Option<usize>,
    /// Metropolis-Hastings steps per inner chain [default: 30]
    #[arg(long)]
    inner_steps: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct CommonFlags {
    /// Master seed; falls back to $SBFIT_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` settings file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sample file: one value per line, or CSV with a `dbh` column
    input: PathBuf,
    #[arg(long, value_enum)]
    model: Option<ModelChoice>,
    /// `ml` is available for `--model jsb` only
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[command(flatten)]
    chain: ChainFlags,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    /// Replications (per sample size for nr-failure) [default: 500 / 300]
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sample sizes for nr-failure [default: 20,100,1000]
    #[arg(long)]
    sizes: Option<String>,
    #[command(flatten)]
    chain: ChainFlags,
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args, Debug)]
pub struct GofArgs {
    /// Sample file
    input: PathBuf,
    /// Johnson SB parameters `delta,gamma,lambda,xi`
    #[arg(long, allow_hyphen_values = true)]
    jsb: Option<String>,
    /// Weibull parameters `alpha,beta,mu`
    #[arg(long, allow_hyphen_values = true)]
    weibull: Option<String>,
    #[command(flatten)]
    common: CommonFlags,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::Gof(a) => commands::gof(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
