//! Grid search over `(delta1, delta2, alpha)` scored by validation balanced accuracy.
//!
//! Direction 1 depends only on `(delta1, alpha)` and direction 2 only on
//! `(delta2, alpha)`, so each distinct direction is solved once and the
//! solutions are combined for every grid point.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::classifier::{assemble, solve_direction, Direction, FitOptions};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::metrics::{confusion, percent, report, ClassificationReport};
use crate::penalty::{PenaltyKind, PenaltyParams, PenaltyRegistry};
use crate::solver::PgdConfig;

pub const DEFAULT_ALPHA_EXPONENTS: [f64; 7] = [-0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5];

/// `points` values spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub delta1_grid: Vec<f64>,
    pub delta2_grid: Vec<f64>,
    /// Step sizes `alpha_base * 10^e` for each exponent.
    pub alpha_base: f64,
    pub alpha_exponents: Vec<f64>,
    /// Everything except `delta1`, `delta2` and `alpha` is taken from here.
    pub base: PgdConfig,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            delta1_grid: log_spaced(1e-4, 1.0, 12),
            delta2_grid: log_spaced(2e-4, 1.0, 12),
            alpha_base: 1.0,
            alpha_exponents: DEFAULT_ALPHA_EXPONENTS.to_vec(),
            base: PgdConfig::default(),
        }
    }
}

impl GridSpec {
    pub fn alphas(&self) -> Vec<f64> {
        self.alpha_exponents
            .iter()
            .map(|e| self.alpha_base * 10f64.powf(*e))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, values: &[f64]| {
            if values.is_empty() {
                return Err(Error::Config(format!("{name} is empty")));
            }
            if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!("{name} contains non-positive value {v}")));
            }
            Ok(())
        };
        check("delta1_grid", &self.delta1_grid)?;
        check("delta2_grid", &self.delta2_grid)?;
        check("alpha grid", &self.alphas())?;
        self.base.validate()
    }

    /// Number of `(delta1, delta2, alpha)` combinations.
    pub fn len(&self) -> usize {
        self.delta1_grid.len() * self.delta2_grid.len() * self.alpha_exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSuccess {
    pub report: ClassificationReport,
    pub selected_1: usize,
    pub selected_2: usize,
    pub union: usize,
    pub elbow_1: Option<usize>,
    pub elbow_2: Option<usize>,
    pub iterations: (usize, usize),
    pub converged: (bool, bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub delta1: f64,
    pub delta2: f64,
    pub alpha: f64,
    /// Error message for failed trials.
    pub outcome: std::result::Result<TrialSuccess, String>,
}

impl TrialRecord {
    pub fn config(&self, base: &PgdConfig) -> PgdConfig {
        PgdConfig {
            delta1: self.delta1,
            delta2: self.delta2,
            alpha: self.alpha,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Side {
    First,
    Second,
}

type DirectionKey = (Side, usize, usize);

fn score(
    first: &Direction,
    second: &Direction,
    cfg: &PgdConfig,
    kind: PenaltyKind,
    validation: &LabeledDataset,
) -> Result<TrialSuccess> {
    let out = assemble(first.clone(), second.clone(), cfg, kind, FitOptions::default())?;
    let predicted = out.model.predict_batch(&validation.x)?;
    let report = report(confusion(&validation.y, &predicted)?)?;
    let sel = &out.model.selection;
    Ok(TrialSuccess {
        report,
        selected_1: sel.selected_1().len(),
        selected_2: sel.selected_2().len(),
        union: sel.selected_union.len(),
        elbow_1: sel.side1.elbow.map(|e| e.x),
        elbow_2: sel.side2.elbow.map(|e| e.x),
        iterations: (out.trace0.iterations_run, out.trace1.iterations_run),
        converged: (out.trace0.converged, out.trace1.converged),
    })
}

/// Fits on `train` and scores on `validation` for every grid point.
///
/// The best point maximizes validation balanced accuracy; ties go to fewer
/// selected features, then to the smaller step size, then to grid order.
pub fn grid_search(
    train: &LabeledDataset,
    validation: &LabeledDataset,
    grid: &GridSpec,
    kind: PenaltyKind,
) -> Result<(PgdConfig, Vec<TrialRecord>)> {
    grid.validate()?;
    if train.x.cols() != validation.x.cols() {
        return Err(Error::shape("grid_search", train.x.cols(), validation.x.cols()));
    }
    let penalty = PenaltyRegistry::with_builtins().create(
        kind.name(),
        &PenaltyParams {
            q: grid.base.q,
            epsilon: grid.base.epsilon,
        },
    )?;
    let (c1, c2) = train.class_blocks();
    if c1.rows() == 0 || c2.rows() == 0 {
        return Err(Error::Input("training data needs both classes".into()));
    }
    let c1 = c1.augment_with_ones()?;
    let c2 = c2.augment_with_ones()?;
    let alphas = grid.alphas();

    let mut keys: Vec<DirectionKey> = Vec::new();
    for a in 0..alphas.len() {
        keys.extend((0..grid.delta1_grid.len()).map(|d| (Side::First, d, a)));
        keys.extend((0..grid.delta2_grid.len()).map(|d| (Side::Second, d, a)));
    }
    let solved: HashMap<DirectionKey, std::result::Result<Direction, String>> = keys
        .par_iter()
        .map(|&key| {
            let (side, d, a) = key;
            let cfg = PgdConfig {
                alpha: alphas[a],
                ..grid.base.clone()
            };
            let result = match side {
                Side::First => solve_direction(&c1, &c2, &cfg, penalty.as_ref(), grid.delta1_grid[d]),
                Side::Second => solve_direction(&c2, &c1, &cfg, penalty.as_ref(), grid.delta2_grid[d]),
            };
            (key, result.map_err(|e| e.to_string()))
        })
        .collect();

    let mut points = Vec::with_capacity(grid.len());
    for d1 in 0..grid.delta1_grid.len() {
        for d2 in 0..grid.delta2_grid.len() {
            for a in 0..alphas.len() {
                points.push((d1, d2, a));
            }
        }
    }
    let records: Vec<TrialRecord> = points
        .par_iter()
        .map(|&(d1, d2, a)| {
            let cfg = PgdConfig {
                delta1: grid.delta1_grid[d1],
                delta2: grid.delta2_grid[d2],
                alpha: alphas[a],
                ..grid.base.clone()
            };
            let outcome = match (&solved[&(Side::First, d1, a)], &solved[&(Side::Second, d2, a)]) {
                (Ok(first), Ok(second)) => score(first, second, &cfg, kind, validation).map_err(|e| e.to_string()),
                (Err(e), _) => Err(format!("direction 1: {e}")),
                (_, Err(e)) => Err(format!("direction 2: {e}")),
            };
            TrialRecord {
                delta1: cfg.delta1,
                delta2: cfg.delta2,
                alpha: cfg.alpha,
                outcome,
            }
        })
        .collect();

    let best = best_trial(&records).ok_or_else(|| Error::ExhaustedGrid {
        attempted: records.len(),
        first: records
            .iter()
            .find_map(|r| r.outcome.as_ref().err().cloned())
            .unwrap_or_default(),
    })?;
    Ok((records[best].config(&grid.base), records))
}

/// Index of the winning successful record, if any.
pub fn best_trial(records: &[TrialRecord]) -> Option<usize> {
    let mut best: Option<(usize, &TrialSuccess)> = None;
    for (i, record) in records.iter().enumerate() {
        let Ok(s) = &record.outcome else { continue };
        let better = match best {
            None => true,
            Some((j, b)) => {
                let (ba, bb) = (s.report.balanced_accuracy, b.report.balanced_accuracy);
                ba > bb || (ba == bb && (s.union < b.union || (s.union == b.union && record.alpha < records[j].alpha)))
            }
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

pub const TRIALS_HEADER: &str = "delta1,delta2,alpha,status,bal_acc,specificity,recall,precision,tn,fp,fn,tp,\
features_1,features_2,union,elbow_1,elbow_2,iterations_1,iterations_2,converged_1,converged_2,error";

/// One CSV row per trial, in grid order.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    let opt = |v: Option<usize>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    for r in records {
        let _ = write!(out, "{},{},{},", r.delta1, r.delta2, r.alpha);
        match &r.outcome {
            Ok(s) => {
                let c = s.report.counts;
                let _ = writeln!(
                    out,
                    "ok,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},",
                    percent(s.report.balanced_accuracy),
                    percent(s.report.specificity),
                    percent(s.report.recall),
                    s.report.precision.map_or_else(|| "NA".to_string(), percent),
                    c.tn,
                    c.fp,
                    c.fn_,
                    c.tp,
                    s.selected_1,
                    s.selected_2,
                    s.union,
                    opt(s.elbow_1),
                    opt(s.elbow_2),
                    s.iterations.0,
                    s.iterations.1,
                    s.converged.0,
                    s.converged.1
                );
            }
            Err(e) => {
                let _ = writeln!(out, "failed{}{}", ",".repeat(18), e.replace([',', '\n'], ";"));
            }
        }
    }
    out
}
