//! Run configuration: built-in defaults, overlaid by a TOML file, then by
//! `GSVP_*` environment variables and command-line flags.

use std::path::{Path, PathBuf};

use gsvp::data::{CsvOptions, SplitSpec};
use gsvp::solver::default_epsilon;
use gsvp::tuning::{log_spaced, GridSpec, DEFAULT_ALPHA_EXPONENTS};
use gsvp::{InitMode, PenaltyKind, PgdConfig};
use serde::Deserialize;

use crate::error::CliError;

/// Every key is optional in the file; missing keys keep these defaults,
/// which are the breast cancer l1 settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub label_column: String,
    pub positive_label: String,
    pub ignore_columns: Vec<String>,
    pub out: PathBuf,
    pub standardize: bool,
    /// Seeds the split and, for `seeded-gaussian`, the initial iterate.
    pub seed: u64,
    pub train_fraction: f64,
    pub holdout_val_fraction: f64,

    pub penalty: String,
    pub q: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub maxiter: usize,
    pub tol: f64,
    pub init: String,
    /// Zero the weights outside the elbow selection before predicting.
    pub mask: bool,

    /// Values of q compared by `stability`.
    pub q_list: Vec<f64>,

    /// Explicit grids for `tune`; empty means `grid_points` log-spaced values.
    pub grid_delta1: Vec<f64>,
    pub grid_delta2: Vec<f64>,
    pub grid_points: usize,
    pub alpha_base: f64,
    pub alpha_exponents: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pgd = PgdConfig::default();
        let split = SplitSpec::default();
        Self {
            dataset: PathBuf::from("data/breast_cancer.csv"),
            label_column: "diagnosis".into(),
            positive_label: "M".into(),
            ignore_columns: Vec::new(),
            out: PathBuf::from("runs/breast-l1"),
            standardize: true,
            seed: split.seed,
            train_fraction: split.train_fraction,
            holdout_val_fraction: split.holdout_val_fraction,
            penalty: PenaltyKind::L1.name().into(),
            q: pgd.q,
            epsilon: default_epsilon(),
            alpha: pgd.alpha,
            delta1: pgd.delta1,
            delta2: pgd.delta2,
            maxiter: pgd.maxiter,
            tol: pgd.tol,
            init: pgd.init.name().into(),
            mask: true,
            q_list: (1..=10).map(|i| i as f64 / 10.0).collect(),
            grid_delta1: Vec::new(),
            grid_delta2: Vec::new(),
            grid_points: 12,
            alpha_base: 1.0,
            alpha_exponents: DEFAULT_ALPHA_EXPONENTS.to_vec(),
        }
    }
}

/// Values that replace config-file entries when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub penalty: Option<String>,
    pub q: Option<f64>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub maxiter: Option<usize>,
    pub no_standardize: bool,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(dataset, out, seed, penalty, q, epsilon, alpha, delta1, delta2, maxiter);
        if o.no_standardize {
            self.standardize = false;
        }
    }

    pub fn penalty_kind(&self) -> Result<PenaltyKind, CliError> {
        self.penalty.parse().map_err(CliError::from)
    }

    pub fn pgd_config(&self) -> Result<PgdConfig, CliError> {
        let cfg = PgdConfig {
            q: self.q,
            epsilon: self.epsilon,
            alpha: self.alpha,
            delta1: self.delta1,
            delta2: self.delta2,
            maxiter: self.maxiter,
            tol: self.tol,
            init: self.init.parse::<InitMode>()?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn split_spec(&self) -> Result<SplitSpec, CliError> {
        let spec = SplitSpec {
            train_fraction: self.train_fraction,
            holdout_val_fraction: self.holdout_val_fraction,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            label_column: self.label_column.clone(),
            positive_label: self.positive_label.clone(),
            ignore_columns: self.ignore_columns.clone(),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        let or_default = |explicit: &[f64], lo: f64| {
            if explicit.is_empty() {
                log_spaced(lo, 1.0, self.grid_points)
            } else {
                explicit.to_vec()
            }
        };
        let grid = GridSpec {
            delta1_grid: or_default(&self.grid_delta1, 1e-4),
            delta2_grid: or_default(&self.grid_delta2, 2e-4),
            alpha_base: self.alpha_base,
            alpha_exponents: self.alpha_exponents.clone(),
            base: self.pgd_config()?,
        };
        grid.validate()?;
        Ok(grid)
    }
}
