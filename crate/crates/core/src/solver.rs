//! Proximal gradient descent on the regularized generalized Rayleigh quotient
//!
//! ```text
//! min_z  ||A_num z||^2 / ||A_den z||^2  +  delta * g(z)
//! ```
//!
//! Each iteration runs, in order: penalty weights at `z_k` (only the `lq`
//! surrogate uses them), the quotient `r(z_k)`, its gradient, the gradient
//! step `y_k = z_k - alpha * grad`, and the proximal map of `g`. The loop
//! stops after `maxiter` iterations or once the objective
//! `h(z) = r(z) + delta * g(z)` changes by less than `tol` relative to its
//! previous value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{norm2, norm_sq, DenseMatrix};
use crate::penalty::{Penalty, PenaltyKind};

/// Smallest admissible `||A_den z||^2`.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

/// Default smoothing for the `lq` surrogate, `10^-2.5`.
pub fn default_epsilon() -> f64 {
    10f64.powf(-2.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// All-ones vector scaled to unit norm.
    OnesUnitNorm,
    /// Standard normal entries from a seeded generator, scaled to unit norm.
    SeededGaussian,
}

impl InitMode {
    pub fn name(self) -> &'static str {
        match self {
            InitMode::OnesUnitNorm => "ones-unit-norm",
            InitMode::SeededGaussian => "seeded-gaussian",
        }
    }
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ones-unit-norm" => Ok(InitMode::OnesUnitNorm),
            "seeded-gaussian" => Ok(InitMode::SeededGaussian),
            other => Err(Error::Config(format!(
                "unknown init mode `{other}` (expected ones-unit-norm or seeded-gaussian)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdConfig {
    pub q: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub maxiter: usize,
    pub tol: f64,
    pub init: InitMode,
    pub seed: u64,
}

impl Default for PgdConfig {
    /// Breast-cancer `l1` settings: `delta1 = delta2 = 20627/23750`, `alpha = 1e-3`.
    fn default() -> Self {
        Self {
            q: 1.0,
            epsilon: default_epsilon(),
            alpha: 1e-3,
            delta1: 20627.0 / 23750.0,
            delta2: 20627.0 / 23750.0,
            maxiter: 10_000,
            tol: 1e-4,
            init: InitMode::OnesUnitNorm,
            seed: 42,
        }
    }
}

impl PgdConfig {
    /// Checks the ranges of every knob. `tol = 0` is accepted and disables
    /// early stopping.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::Config(format!("q must lie in (0, 1], got {}", self.q)));
        }
        positive("epsilon", self.epsilon)?;
        positive("alpha", self.alpha)?;
        positive("delta1", self.delta1)?;
        positive("delta2", self.delta2)?;
        if self.maxiter == 0 {
            return Err(Error::Config("maxiter must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn initial_iterate(&self, dim: usize) -> Vec<f64> {
        let mut z: Vec<f64> = match self.init {
            InitMode::OnesUnitNorm => vec![1.0; dim],
            InitMode::SeededGaussian => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
            }
        };
        let norm = norm2(&z);
        if norm > 0.0 {
            z.iter_mut().for_each(|v| *v /= norm);
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    /// `h(z_0), h(z_1), ...`; one entry more than `iterations_run`.
    pub objective_history: Vec<f64>,
    /// `|h(z_{k+1}) - h(z_k)| / |h(z_k)|` per iteration.
    pub relative_change_history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// `r(z)` at the returned iterate.
    pub final_ratio: f64,
}

/// Products and quotient cached for one iterate.
struct Evaluation {
    num: Vec<f64>,
    den: Vec<f64>,
    den_sq: f64,
    ratio: f64,
}

fn evaluate(a_num: &DenseMatrix, a_den: &DenseMatrix, z: &[f64], iteration: usize) -> Result<Evaluation> {
    let num = a_num.matvec(z)?;
    let den = a_den.matvec(z)?;
    let den_sq = norm_sq(&den);
    if den_sq.is_nan() || den_sq <= DENOMINATOR_FLOOR {
        return Err(Error::DegenerateDenominator {
            iteration,
            value: den_sq,
        });
    }
    let ratio = norm_sq(&num) / den_sq;
    Ok(Evaluation {
        num,
        den,
        den_sq,
        ratio,
    })
}

fn check_shapes(a_num: &DenseMatrix, a_den: &DenseMatrix, z: &[f64]) -> Result<()> {
    if a_num.cols() != a_den.cols() {
        return Err(Error::shape("rayleigh_quotient", a_num.cols(), a_den.cols()));
    }
    if z.len() != a_num.cols() {
        return Err(Error::shape("rayleigh_quotient", a_num.cols(), z.len()));
    }
    Ok(())
}

/// `||A_num z||^2 / ||A_den z||^2`.
pub fn rayleigh_quotient(a_num: &DenseMatrix, a_den: &DenseMatrix, z: &[f64]) -> Result<f64> {
    check_shapes(a_num, a_den, z)?;
    Ok(evaluate(a_num, a_den, z, 0)?.ratio)
}

/// `2 / ||A_den z||^2 * (A_num^T (A_num z) - r * A_den^T (A_den z))`.
pub fn gradient(a_num: &DenseMatrix, a_den: &DenseMatrix, z: &[f64], r_value: f64) -> Result<Vec<f64>> {
    check_shapes(a_num, a_den, z)?;
    let eval = evaluate(a_num, a_den, z, 0)?;
    gradient_from(a_num, a_den, &eval, r_value)
}

fn gradient_from(a_num: &DenseMatrix, a_den: &DenseMatrix, eval: &Evaluation, r_value: f64) -> Result<Vec<f64>> {
    let scale = 2.0 / eval.den_sq;
    let mut g = a_num.matvec_transposed(&eval.num)?;
    let back = a_den.matvec_transposed(&eval.den)?;
    for (gl, bl) in g.iter_mut().zip(&back) {
        *gl = scale * (*gl - r_value * bl);
    }
    Ok(g)
}

/// `z - alpha * grad`.
pub fn gd_step(z: &[f64], grad: &[f64], alpha: f64) -> Vec<f64> {
    z.iter().zip(grad).map(|(zl, gl)| zl - alpha * gl).collect()
}

fn relative_change(previous: f64, next: f64) -> f64 {
    if previous.abs() < DENOMINATOR_FLOOR {
        if next.abs() < DENOMINATOR_FLOOR {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (next - previous).abs() / previous.abs()
    }
}

/// Runs proximal gradient descent from `cfg.initial_iterate`.
///
/// `delta` is the regularization weight of this direction; `cfg.delta1` and
/// `cfg.delta2` are not read here.
pub fn solve(
    a_num: &DenseMatrix,
    a_den: &DenseMatrix,
    cfg: &PgdConfig,
    penalty: &dyn Penalty,
    delta: f64,
) -> Result<(Vec<f64>, SolveTrace)> {
    cfg.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    if a_num.cols() == 0 {
        return Err(Error::Input("solver needs at least one column".into()));
    }
    let z0 = cfg.initial_iterate(a_num.cols());
    solve_from(a_num, a_den, cfg, penalty, delta, z0)
}

/// As [`solve`], starting from an explicit iterate.
pub fn solve_from(
    a_num: &DenseMatrix,
    a_den: &DenseMatrix,
    cfg: &PgdConfig,
    penalty: &dyn Penalty,
    delta: f64,
    z0: Vec<f64>,
) -> Result<(Vec<f64>, SolveTrace)> {
    check_shapes(a_num, a_den, &z0)?;
    let objective = |eval: &Evaluation, z: &[f64], iteration: usize| -> Result<f64> {
        let h = eval.ratio + delta * penalty.value(z);
        if h.is_finite() {
            Ok(h)
        } else {
            Err(Error::Divergence {
                iteration,
                alpha: cfg.alpha,
            })
        }
    };

    let mut z = z0;
    let mut eval = evaluate(a_num, a_den, &z, 0)?;
    let mut h = objective(&eval, &z, 0)?;
    let mut trace = SolveTrace {
        objective_history: vec![h],
        relative_change_history: Vec::new(),
        iterations_run: 0,
        converged: false,
        final_ratio: eval.ratio,
    };

    for k in 0..cfg.maxiter {
        let weights = penalty.weights(&z);
        let grad = gradient_from(a_num, a_den, &eval, eval.ratio)?;
        let y = gd_step(&z, &grad, cfg.alpha);
        let next = penalty.prox(&y, cfg.alpha, delta, &weights);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                iteration: k + 1,
                alpha: cfg.alpha,
            });
        }
        let next_eval = evaluate(a_num, a_den, &next, k + 1)?;
        let next_h = objective(&next_eval, &next, k + 1)?;
        let change = relative_change(h, next_h);

        z = next;
        eval = next_eval;
        h = next_h;
        trace.objective_history.push(h);
        trace.relative_change_history.push(change);
        trace.iterations_run = k + 1;
        if change < cfg.tol {
            trace.converged = true;
            break;
        }
    }
    trace.final_ratio = eval.ratio;
    Ok((z, trace))
}

/// Convenience for callers holding only a [`PenaltyKind`].
pub fn penalty_for(kind: PenaltyKind, cfg: &PgdConfig) -> Result<Box<dyn Penalty>> {
    crate::penalty::PenaltyRegistry::with_builtins().create(
        kind.name(),
        &crate::penalty::PenaltyParams {
            q: cfg.q,
            epsilon: cfg.epsilon,
        },
    )
}
