//! Feature selection from the sorted magnitudes of the two plane normals.
//!
//! Each normal is sorted by magnitude; the elbow of the sorted curve (the
//! point farthest from the chord joining its end points, both axes scaled to
//! `[0, 1]`) fixes how many leading features are kept.

use crate::error::{Error, Result};

/// Distances this close to the maximum count as ties.
const TIE_TOLERANCE: f64 = 1e-12;
/// Below this every point lies on the chord.
const DEGENERATE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElbowPoint {
    /// 1-based rank along the sorted curve.
    pub x: usize,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elbow {
    Point(ElbowPoint),
    /// The curve is a straight line (or constant); no elbow exists.
    Degenerate,
}

/// Magnitudes in descending order and the permutation producing them.
/// Equal magnitudes keep their original order.
pub fn sort_by_magnitude(w: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()));
    let magnitudes = perm.iter().map(|&i| w[i].abs()).collect();
    (magnitudes, perm)
}

/// Perpendicular distance of every curve point to the end-point chord, after
/// min-max scaling both axes.
pub fn chord_distances(curve: &[f64]) -> Vec<f64> {
    let n = curve.len();
    let (lo, hi) = curve.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    if n < 2 || span.is_nan() || span <= 0.0 {
        return vec![0.0; n];
    }
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = curve.iter().map(|v| (v - lo) / span).collect();
    let (x0, y0, x1, y1) = (xs[0], ys[0], xs[n - 1], ys[n - 1]);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let length = dx.hypot(dy);
    xs.iter()
        .zip(&ys)
        .map(|(x, y)| (dy * (x - x0) - dx * (y - y0)).abs() / length)
        .collect()
}

pub fn find_elbow(curve: &[f64]) -> Result<Elbow> {
    if curve.len() < 3 {
        return Err(Error::CurveTooShort(curve.len()));
    }
    let distances = chord_distances(curve);
    let best = distances.iter().copied().fold(0.0, f64::max);
    if best <= DEGENERATE_DISTANCE {
        return Ok(Elbow::Degenerate);
    }
    let idx = distances
        .iter()
        .position(|&d| d >= best - TIE_TOLERANCE * best)
        .expect("maximum is attained");
    Ok(Elbow::Point(ElbowPoint {
        x: idx + 1,
        y: curve[idx],
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct SelectionOptions {
    /// Keep every feature when a curve has no elbow. When off, such a side
    /// selects nothing.
    pub keep_all_on_degenerate: bool,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            keep_all_on_degenerate: true,
        }
    }
}

/// Sorted curve, elbow and selected indices for one normal vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SideSelection {
    pub sorted_magnitudes: Vec<f64>,
    pub rank_indices: Vec<usize>,
    /// `None` when the curve was degenerate.
    pub elbow: Option<ElbowPoint>,
    /// Leading entries of `rank_indices`.
    pub selected: Vec<usize>,
}

impl SideSelection {
    fn build(w: &[f64], opts: SelectionOptions) -> Result<Self> {
        let (sorted_magnitudes, rank_indices) = sort_by_magnitude(w);
        let elbow = match find_elbow(&sorted_magnitudes)? {
            Elbow::Point(p) => Some(p),
            Elbow::Degenerate => None,
        };
        let keep = match elbow {
            Some(p) => p.x,
            None if opts.keep_all_on_degenerate => w.len(),
            None => 0,
        };
        let selected = rank_indices[..keep].to_vec();
        Ok(Self {
            sorted_magnitudes,
            rank_indices,
            elbow,
            selected,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.elbow.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub side1: SideSelection,
    pub side2: SideSelection,
    /// `selected_1` in rank order, then the rest of `selected_2` in rank order.
    pub selected_union: Vec<usize>,
    pub exclusive_1: Vec<usize>,
    pub exclusive_2: Vec<usize>,
    /// In the rank order of side 1.
    pub common: Vec<usize>,
}

impl SelectionResult {
    pub fn selected_1(&self) -> &[usize] {
        &self.side1.selected
    }

    pub fn selected_2(&self) -> &[usize] {
        &self.side2.selected
    }

    pub fn is_selected_1(&self, feature: usize) -> bool {
        self.side1.selected.contains(&feature)
    }

    /// Builds the union and its exclusive/common partition from two selections.
    pub fn from_sides(side1: SideSelection, side2: SideSelection, dim: usize) -> Self {
        let mut in1 = vec![false; dim];
        let mut in2 = vec![false; dim];
        side1.selected.iter().for_each(|&i| in1[i] = true);
        side2.selected.iter().for_each(|&i| in2[i] = true);

        let exclusive_1 = side1.selected.iter().copied().filter(|&i| !in2[i]).collect();
        let common = side1.selected.iter().copied().filter(|&i| in2[i]).collect();
        let exclusive_2: Vec<usize> = side2.selected.iter().copied().filter(|&i| !in1[i]).collect();
        let selected_union = side1
            .selected
            .iter()
            .copied()
            .chain(exclusive_2.iter().copied())
            .collect();
        Self {
            side1,
            side2,
            selected_union,
            exclusive_1,
            exclusive_2,
            common,
        }
    }
}

pub fn select_features(w1: &[f64], w2: &[f64]) -> Result<SelectionResult> {
    select_features_with(w1, w2, SelectionOptions::default())
}

pub fn select_features_with(w1: &[f64], w2: &[f64], opts: SelectionOptions) -> Result<SelectionResult> {
    if w1.len() != w2.len() {
        return Err(Error::shape("select_features", w1.len(), w2.len()));
    }
    let side1 = SideSelection::build(w1, opts)?;
    let side2 = SideSelection::build(w2, opts)?;
    Ok(SelectionResult::from_sides(side1, side2, w1.len()))
}

/// Every feature selected on both sides; used when masking is switched off.
pub fn select_all(w1: &[f64], w2: &[f64]) -> Result<SelectionResult> {
    if w1.len() != w2.len() {
        return Err(Error::shape("select_all", w1.len(), w2.len()));
    }
    let side = |w: &[f64]| {
        let (sorted_magnitudes, rank_indices) = sort_by_magnitude(w);
        SideSelection {
            selected: rank_indices.clone(),
            sorted_magnitudes,
            rank_indices,
            elbow: None,
        }
    };
    Ok(SelectionResult::from_sides(side(w1), side(w2), w1.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskedHyperplanePair {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b1: f64,
    pub b2: f64,
}

fn mask(w: &[f64], keep: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for &i in keep {
        out[i] = w[i];
    }
    out
}

/// Zeroes every coordinate not selected on its own side.
pub fn apply_mask(w1: &[f64], w2: &[f64], b1: f64, b2: f64, sel: &SelectionResult) -> MaskedHyperplanePair {
    MaskedHyperplanePair {
        w1: mask(w1, sel.selected_1()),
        w2: mask(w2, sel.selected_2()),
        b1,
        b2,
    }
}
