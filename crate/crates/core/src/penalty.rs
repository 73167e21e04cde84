//! Sparsity-promoting penalties and their proximal maps.
//!
//! Each penalty is a strategy behind [`Penalty`]; the solver only sees the
//! trait object. [`PenaltyRegistry`] maps names (as used in configuration
//! files and on the command line) to constructors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    /// `delta * ||z||_1`, prox is soft thresholding.
    L1,
    /// Weighted-l2 surrogate of `delta * ||z||_q^q`, prox is diagonal shrinkage.
    Lq,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::L1 => "l1",
            PenaltyKind::Lq => "lq",
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(PenaltyKind::L1),
            "lq" => Ok(PenaltyKind::Lq),
            other => Err(Error::UnknownPenalty(other.to_string(), "l1, lq".into())),
        }
    }
}

/// A regularizer `g` used in the proximal step.
///
/// The solver calls [`Penalty::weights`] once per iteration with the iterate
/// entering the loop body, then passes the returned weights unchanged to
/// [`Penalty::prox`]. Penalties without iterate-dependent weights return an
/// empty vector.
pub trait Penalty: fmt::Debug + Send + Sync {
    fn kind(&self) -> PenaltyKind;

    /// Per-coordinate weights frozen at `z`.
    fn weights(&self, z: &[f64]) -> Vec<f64>;

    /// Penalty value at `z` without the regularization factor.
    fn value(&self, z: &[f64]) -> f64;

    /// `argmin_x ||x - y||^2 + alpha * delta * g(x)` with `g` frozen by `weights`.
    fn prox(&self, y: &[f64], alpha: f64, delta: f64, weights: &[f64]) -> Vec<f64>;
}

/// Soft thresholding at `alpha * delta / 2`.
pub fn prox_l1(y: &[f64], alpha: f64, delta: f64) -> Vec<f64> {
    let threshold = 0.5 * alpha * delta;
    y.iter()
        .map(|&v| {
            let shrunk = v.abs() - threshold;
            if shrunk > 0.0 {
                shrunk.copysign(v)
            } else {
                0.0
            }
        })
        .collect()
}

/// Diagonal of the reweighting matrix: `(z_l^2 + eps^2)^((q - 2) / 2)`.
pub fn reweight_diagonal(z: &[f64], epsilon: f64, q: f64) -> Vec<f64> {
    let exponent = 0.5 * (q - 2.0);
    let eps_sq = epsilon * epsilon;
    z.iter().map(|&v| (v * v + eps_sq).powf(exponent)).collect()
}

/// `(I + alpha * delta * diag(d))^{-1} y`, elementwise.
pub fn prox_lq(y: &[f64], d: &[f64], alpha: f64, delta: f64) -> Vec<f64> {
    let step = alpha * delta;
    y.iter().zip(d).map(|(&v, &w)| v / (1.0 + step * w)).collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct L1Penalty;

impl Penalty for L1Penalty {
    fn kind(&self) -> PenaltyKind {
        PenaltyKind::L1
    }

    fn weights(&self, _z: &[f64]) -> Vec<f64> {
        Vec::new()
    }

    fn value(&self, z: &[f64]) -> f64 {
        z.iter().map(|v| v.abs()).sum()
    }

    fn prox(&self, y: &[f64], alpha: f64, delta: f64, _weights: &[f64]) -> Vec<f64> {
        prox_l1(y, alpha, delta)
    }
}

/// Smoothed `l_q` penalty, `0 < q <= 1`, approximated by `z^T D(z) z`.
#[derive(Debug, Clone, Copy)]
pub struct LqPenalty {
    q: f64,
    epsilon: f64,
}

impl LqPenalty {
    pub fn new(q: f64, epsilon: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Config(format!("lq penalty needs 0 < q <= 1, got {q}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { q, epsilon })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Penalty for LqPenalty {
    fn kind(&self) -> PenaltyKind {
        PenaltyKind::Lq
    }

    fn weights(&self, z: &[f64]) -> Vec<f64> {
        reweight_diagonal(z, self.epsilon, self.q)
    }

    fn value(&self, z: &[f64]) -> f64 {
        // The surrogate is evaluated with its weights taken at z itself.
        reweight_diagonal(z, self.epsilon, self.q)
            .iter()
            .zip(z)
            .map(|(d, v)| d * v * v)
            .sum()
    }

    fn prox(&self, y: &[f64], alpha: f64, delta: f64, weights: &[f64]) -> Vec<f64> {
        prox_lq(y, weights, alpha, delta)
    }
}

/// Parameters a penalty constructor may read.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyParams {
    pub q: f64,
    pub epsilon: f64,
}

type Constructor = fn(&PenaltyParams) -> Result<Box<dyn Penalty>>;

/// Name-to-constructor table for penalty strategies.
pub struct PenaltyRegistry {
    entries: BTreeMap<String, Constructor>,
}

impl PenaltyRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry holding `l1` and `lq`.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(PenaltyKind::L1.name(), |_| Ok(Box::new(L1Penalty)));
        registry.register(PenaltyKind::Lq.name(), |p| {
            Ok(Box::new(LqPenalty::new(p.q, p.epsilon)?))
        });
        registry
    }

    /// Adds or replaces a constructor.
    pub fn register(&mut self, name: &str, constructor: Constructor) {
        self.entries.insert(name.to_ascii_lowercase(), constructor);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, params: &PenaltyParams) -> Result<Box<dyn Penalty>> {
        let constructor = self
            .entries
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownPenalty(name.to_string(), self.names().collect::<Vec<_>>().join(", ")))?;
        constructor(params)
    }
}

impl Default for PenaltyRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl fmt::Debug for PenaltyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense-grid argmin of a scalar objective over `[lo, hi]`.
    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, pitch: f64) -> f64 {
        let steps = ((hi - lo) / pitch).ceil() as usize;
        (0..=steps)
            .map(|k| lo + k as f64 * pitch)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    #[test]
    fn prox_l1_examples() {
        // alpha * delta / 2 = 0.5
        assert_eq!(prox_l1(&[3.0, -1.0, 0.2], 1.0, 1.0), vec![2.5, -0.5, 0.0]);
        assert_eq!(prox_l1(&[0.0; 4], 0.3, 2.0), vec![0.0; 4]);
    }

    #[test]
    fn prox_l1_matches_grid_for_fixed_scalars() {
        for &(y, ad) in &[(0.7, 0.4), (-2.0, 1.5), (0.1, 0.5), (1.3, 2.6)] {
            let brute = grid_argmin(|z: f64| (z - y).powi(2) + ad * z.abs(), -3.0, 3.0, 1e-4);
            let got = prox_l1(&[y], ad, 1.0)[0];
            assert!((got - brute).abs() <= 1e-4, "y={y} ad={ad}: {got} vs {brute}");
        }
    }

    #[test]
    fn reweight_examples() {
        assert_eq!(reweight_diagonal(&[0.0; 3], 1.0, 0.5), vec![1.0; 3]);
        let d = reweight_diagonal(&[3f64.sqrt()], 1.0, 1.0);
        assert!((d[0] - 0.5).abs() < 1e-15);
        let d = reweight_diagonal(&[0.0, 0.1, -0.5, 2.0, 10.0], 0.01, 0.3);
        assert!(d.windows(2).all(|w| w[0] > w[1]));
        assert!(d.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn prox_lq_examples() {
        let y = [2.0, -4.0, 0.0];
        assert_eq!(prox_lq(&y, &[1.0; 3], 1.0, 1.0), vec![1.0, -2.0, 0.0]);
        assert_eq!(prox_lq(&y, &[5.0; 3], 0.0, 1.0), y.to_vec());
        let brute = grid_argmin(|z: f64| (z - 1.2).powi(2) + 0.3 * 2.0 * z * z, -3.0, 3.0, 1e-4);
        assert!((prox_lq(&[1.2], &[2.0], 0.3, 1.0)[0] - brute).abs() <= 1e-4);
    }

    #[test]
    fn registry_resolves_builtins_and_rejects_unknown() {
        let registry = PenaltyRegistry::with_builtins();
        let params = PenaltyParams { q: 0.5, epsilon: 1e-2 };
        assert_eq!(registry.create("l1", &params).unwrap().kind(), PenaltyKind::L1);
        assert_eq!(registry.create("LQ", &params).unwrap().kind(), PenaltyKind::Lq);
        let err = registry.create("scad", &params).unwrap_err();
        assert!(err.to_string().contains("l1, lq"));
        let bad = PenaltyParams { q: 1.5, epsilon: 1e-2 };
        assert!(registry.create("lq", &bad).is_err());
    }

    #[test]
    fn penalty_values() {
        assert_eq!(L1Penalty.value(&[1.0, -2.0, 0.5]), 3.5);
        // q = 1, eps -> 0 recovers the l1 norm.
        let lq = LqPenalty::new(1.0, 1e-12).unwrap();
        assert!((lq.value(&[1.0, -2.0, 0.5]) - 3.5).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn prox_l1_subgradient_optimality(
            y in prop::collection::vec(-5.0f64..5.0, 1..20),
            alpha in 1e-3f64..2.0,
            delta in 1e-3f64..2.0,
        ) {
            let t = 0.5 * alpha * delta;
            let z = prox_l1(&y, alpha, delta);
            for (zl, yl) in z.iter().zip(&y) {
                if *zl == 0.0 {
                    prop_assert!(yl.abs() <= t);
                } else {
                    prop_assert!((zl - (yl - zl.signum() * t)).abs() <= 1e-12);
                }
            }
            let nz_in = y.iter().filter(|v| **v == 0.0).count();
            let nz_out = z.iter().filter(|v| **v == 0.0).count();
            prop_assert!(nz_out >= nz_in);
        }

        #[test]
        fn prox_lq_strictly_shrinks(
            y in prop::collection::vec(-5.0f64..5.0, 1..20),
            alpha in 1e-3f64..2.0,
            delta in 1e-3f64..2.0,
            q in 0.05f64..1.0,
        ) {
            prop_assume!(y.iter().any(|v| *v != 0.0));
            let d = reweight_diagonal(&y, 0.1, q);
            let z = prox_lq(&y, &d, alpha, delta);
            prop_assert!(crate::matrix::norm2(&z) < crate::matrix::norm2(&y));
            for (zl, yl) in z.iter().zip(&y) {
                if *yl != 0.0 {
                    prop_assert!(zl.abs() < yl.abs());
                }
            }
        }
    }
}
