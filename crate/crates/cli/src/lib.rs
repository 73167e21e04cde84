//! Command-line front end: `split`, `tune`, `fit`, `stability` and `plot`.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gsvp", version, about = "Sparse GSVP feature selection and classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the stratified train/validation/test manifests.
    Split,
    /// Grid search (delta1, delta2, alpha) on the validation split.
    Tune,
    /// Fit, evaluate on validation and test, and save the model.
    Fit,
    /// Compare feature sets across `q_list` with the Jaccard index.
    Stability,
    /// Render the curves of a finished `fit` (and `stability`) run.
    Plot,
}

/// Flags beat `GSVP_*` variables, which beat the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML config file; missing keys keep their defaults.
    #[arg(long, global = true, env = "GSVP_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "GSVP_DATASET")]
    pub dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "GSVP_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "GSVP_SEED")]
    pub seed: Option<u64>,
    /// `l1` or `lq`.
    #[arg(long, global = true, env = "GSVP_PENALTY")]
    pub penalty: Option<String>,
    #[arg(long, global = true, env = "GSVP_Q")]
    pub q: Option<f64>,
    #[arg(long, global = true, env = "GSVP_EPSILON")]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, env = "GSVP_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, env = "GSVP_DELTA1")]
    pub delta1: Option<f64>,
    #[arg(long, global = true, env = "GSVP_DELTA2")]
    pub delta2: Option<f64>,
    #[arg(long, global = true, env = "GSVP_MAXITER")]
    pub maxiter: Option<usize>,
    /// Fit on raw features instead of train-standardized ones.
    #[arg(long, global = true, env = "GSVP_NO_STANDARDIZE")]
    pub no_standardize: bool,
}

impl Flags {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            dataset: self.dataset.clone(),
            out: self.out.clone(),
            seed: self.seed,
            penalty: self.penalty.clone(),
            q: self.q,
            epsilon: self.epsilon,
            alpha: self.alpha,
            delta1: self.delta1,
            delta2: self.delta2,
            maxiter: self.maxiter,
            no_standardize: self.no_standardize,
        });
        Ok(cfg)
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Split => commands::cmd_split(cfg),
        Command::Tune => commands::cmd_tune(cfg),
        Command::Fit => commands::cmd_fit(cfg),
        Command::Stability => commands::cmd_stability(cfg),
        Command::Plot => commands::cmd_plot(cfg),
    }
}
