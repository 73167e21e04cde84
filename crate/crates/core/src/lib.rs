//! Sparse approximate generalized singular vectors by proximal gradient
//! descent, and their use for feature selection and binary classification
//! with two non-parallel proximal hyperplanes.
//!
//! The pieces, bottom-up:
//!
//! * [`matrix`]: dense storage, `A z` and `A^T u` without Gram matrices.
//! * [`penalty`]: `l1` and smoothed `lq` penalties behind the [`Penalty`]
//!   trait, looked up by name in a [`PenaltyRegistry`].
//! * [`solver`]: the proximal gradient loop on the regularized quotient.
//! * [`select`]: elbow-based feature selection on sorted weight magnitudes.
//! * [`classifier`]: fitting both planes and the nearest-plane rule.
//! * [`metrics`], [`data`], [`tuning`], [`model_io`]: evaluation, ingestion
//!   and splitting, grid search, and the model file format.

pub mod classifier;
pub mod data;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod model_io;
pub mod penalty;
pub mod select;
pub mod solver;
pub mod tuning;

pub use classifier::{fit, fit_with, FitOptions, FitOutcome, GsvpSvmModel, Hyperplane};
pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use model_io::SavedModel;
pub use penalty::{L1Penalty, LqPenalty, Penalty, PenaltyKind, PenaltyParams, PenaltyRegistry};
pub use select::{ElbowPoint, SelectionResult};
pub use solver::{solve, InitMode, PgdConfig, SolveTrace};
