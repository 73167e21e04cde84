//! Two non-parallel proximal hyperplanes and the nearest-plane rule.
//!
//! Plane 0 minimizes `||[C1 e] w||^2 / ||[C2 e] w||^2` (close to Class 0, far
//! from Class 1); plane 1 swaps the roles. A sample goes to Class 0 when its
//! normalized distance to plane 0 is not larger than to plane 1.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::penalty::{Penalty, PenaltyKind};
use crate::select::{apply_mask, select_all, select_features_with, SelectionOptions, SelectionResult};
use crate::solver::{solve, PgdConfig, SolveTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Hyperplane {
    /// Splits `[w; b]`.
    pub fn from_augmented(augmented: &[f64]) -> Self {
        let (w, b) = augmented.split_at(augmented.len() - 1);
        Self { w: w.to_vec(), b: b[0] }
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.w)
    }

    /// `|x^T w + b| / ||w||`.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::shape("Hyperplane::distance", self.w.len(), x.len()));
        }
        let norm = self.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::EmptyModel("hyperplane normal is zero".into()));
        }
        Ok((dot(x, &self.w) + self.b).abs() / norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsvpSvmModel {
    /// Close to Class 0.
    pub plane0: Hyperplane,
    /// Close to Class 1.
    pub plane1: Hyperplane,
    pub selection: SelectionResult,
    pub config: PgdConfig,
    pub penalty: PenaltyKind,
    /// Both quotients are identically one, so the planes carry no class information.
    pub non_discriminative: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Zero the normal entries outside each side's elbow selection.
    pub mask: bool,
    pub selection: SelectionOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            mask: true,
            selection: SelectionOptions::default(),
        }
    }
}

/// A fitted model plus the per-direction solver diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: GsvpSvmModel,
    pub trace0: SolveTrace,
    pub trace1: SolveTrace,
    /// Unmasked normals, bias excluded.
    pub raw_w0: Vec<f64>,
    pub raw_w1: Vec<f64>,
}

/// One solved direction: the augmented weight vector and its trace.
pub type Direction = (Vec<f64>, SolveTrace);

/// Solves the direction whose fidelity numerator is `num` (already augmented).
pub fn solve_direction(
    num: &DenseMatrix,
    den: &DenseMatrix,
    cfg: &PgdConfig,
    penalty: &dyn Penalty,
    delta: f64,
) -> Result<Direction> {
    solve(num, den, cfg, penalty, delta)
}

fn check_blocks(c1: &DenseMatrix, c2: &DenseMatrix) -> Result<()> {
    if c1.cols() != c2.cols() {
        return Err(Error::shape("fit", c1.cols(), c2.cols()));
    }
    if c1.cols() < 2 {
        return Err(Error::Input(format!("need at least 2 features, got {}", c1.cols())));
    }
    if c1.rows() == 0 || c2.rows() == 0 {
        return Err(Error::Input("each class needs at least one sample".into()));
    }
    Ok(())
}

pub fn fit(c1: &DenseMatrix, c2: &DenseMatrix, cfg: &PgdConfig, penalty: &dyn Penalty) -> Result<GsvpSvmModel> {
    Ok(fit_with(c1, c2, cfg, penalty, FitOptions::default())?.model)
}

pub fn fit_with(
    c1: &DenseMatrix,
    c2: &DenseMatrix,
    cfg: &PgdConfig,
    penalty: &dyn Penalty,
    opts: FitOptions,
) -> Result<FitOutcome> {
    check_blocks(c1, c2)?;
    let c1_aug = c1.augment_with_ones()?;
    let c2_aug = c2.augment_with_ones()?;
    let first = solve_direction(&c1_aug, &c2_aug, cfg, penalty, cfg.delta1)?;
    let second = solve_direction(&c2_aug, &c1_aug, cfg, penalty, cfg.delta2)?;
    assemble(first, second, cfg, penalty.kind(), opts)
}

/// Builds the model from two solved directions: split biases, select, mask.
pub fn assemble(
    first: Direction,
    second: Direction,
    cfg: &PgdConfig,
    penalty: PenaltyKind,
    opts: FitOptions,
) -> Result<FitOutcome> {
    let (w0_aug, trace0) = first;
    let (w1_aug, trace1) = second;
    let raw0 = Hyperplane::from_augmented(&w0_aug);
    let raw1 = Hyperplane::from_augmented(&w1_aug);

    let selection = if opts.mask && raw0.w.len() >= 3 {
        select_features_with(&raw0.w, &raw1.w, opts.selection)?
    } else {
        select_all(&raw0.w, &raw1.w)?
    };
    let masked = apply_mask(&raw0.w, &raw1.w, raw0.b, raw1.b, &selection);
    let plane0 = Hyperplane {
        w: masked.w1,
        b: masked.b1,
    };
    let plane1 = Hyperplane {
        w: masked.w2,
        b: masked.b2,
    };
    for (name, plane) in [("plane 0", &plane0), ("plane 1", &plane1)] {
        if plane.norm().is_nan() || plane.norm() <= 0.0 {
            return Err(Error::EmptyModel(format!("{name} has a zero normal after masking")));
        }
    }
    let non_discriminative = (trace0.final_ratio - 1.0).abs() < 1e-12 && (trace1.final_ratio - 1.0).abs() < 1e-12;
    Ok(FitOutcome {
        model: GsvpSvmModel {
            plane0,
            plane1,
            selection,
            config: cfg.clone(),
            penalty,
            non_discriminative,
        },
        trace0,
        trace1,
        raw_w0: raw0.w,
        raw_w1: raw1.w,
    })
}

impl GsvpSvmModel {
    pub fn features(&self) -> usize {
        self.plane0.w.len()
    }

    /// 0 when the distance to plane 0 is at most the distance to plane 1.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let d0 = self.plane0.distance(x)?;
        let d1 = self.plane1.distance(x)?;
        Ok(if d0 <= d1 { 0 } else { 1 })
    }

    pub fn predict_batch(&self, x: &DenseMatrix) -> Result<Vec<u8>> {
        if x.cols() != self.features() {
            return Err(Error::shape("predict_batch", self.features(), x.cols()));
        }
        x.row_iter().map(|row| self.predict(row)).collect()
    }
}
