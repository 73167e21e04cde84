//! Dense row-major storage and the few kernels the solver needs.
//!
//! Nothing here forms a Gram matrix: the solver only ever multiplies by a
//! data matrix or by its transpose.

use crate::error::{Error, Result};

/// Row-major real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("DenseMatrix::new", rows * cols, data.len()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite entry {} at row {}, column {}",
                data[pos],
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::shape("DenseMatrix::from_rows", cols, row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, and a zero-column matrix has no entries to yield anyway.
        self.data
            .chunks_exact(self.cols.max(1))
            .take(if self.cols == 0 { 0 } else { self.rows })
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// The rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// `A z`.
    pub fn matvec(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.cols {
            return Err(Error::shape("matvec", self.cols, z.len()));
        }
        Ok(self.row_iter().map(|row| dot(row, z)).collect())
    }

    /// `A^T u`, accumulated row by row so the matrix is read in storage order.
    pub fn matvec_transposed(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.rows {
            return Err(Error::shape("matvec_transposed", self.rows, u.len()));
        }
        let mut out = vec![0.0; self.cols];
        for (row, &weight) in self.row_iter().zip(u) {
            if weight == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * weight;
            }
        }
        Ok(out)
    }

    /// `[C e]`: appends a column of ones.
    pub fn augment_with_ones(&self) -> Result<Self> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Input("cannot augment an empty matrix".into()));
        }
        let cols = self.cols + 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for row in self.row_iter() {
            data.extend_from_slice(row);
            data.push(1.0);
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
        })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm2(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn matvec_examples() {
        assert_eq!(DenseMatrix::identity(2).matvec(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(
            m(&[&[1.0, 2.0], &[3.0, 4.0]]).matvec(&[1.0, 1.0]).unwrap(),
            vec![3.0, 7.0]
        );
        assert_eq!(m(&[&[1.0, 1.0, 1.0]]).matvec(&[0.0; 3]).unwrap(), vec![0.0]);
    }

    #[test]
    fn matvec_transposed_examples() {
        assert_eq!(
            DenseMatrix::identity(2).matvec_transposed(&[5.0, 7.0]).unwrap(),
            vec![5.0, 7.0]
        );
        assert_eq!(
            m(&[&[1.0, 2.0], &[3.0, 4.0]]).matvec_transposed(&[1.0, 0.0]).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            m(&[&[1.0], &[1.0], &[1.0]])
                .matvec_transposed(&[1.0, 2.0, 3.0])
                .unwrap(),
            vec![6.0]
        );
    }

    #[test]
    fn shape_errors() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(a.matvec(&[1.0]), Err(Error::Shape { .. })));
        assert!(matches!(
            a.matvec_transposed(&[1.0, 2.0, 3.0]),
            Err(Error::Shape { .. })
        ));
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn augment_examples() {
        assert_eq!(m(&[&[1.0, 2.0]]).augment_with_ones().unwrap(), m(&[&[1.0, 2.0, 1.0]]));
        assert_eq!(
            DenseMatrix::zeros(2, 2).augment_with_ones().unwrap(),
            m(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]])
        );
        assert_eq!(m(&[&[3.0]]).augment_with_ones().unwrap(), m(&[&[3.0, 1.0]]));
        assert!(DenseMatrix::zeros(0, 3).augment_with_ones().is_err());
    }

    fn matrix_and_vectors() -> impl Strategy<Value = (DenseMatrix, Vec<f64>, Vec<f64>)> {
        (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
            (
                prop::collection::vec(-10.0f64..10.0, r * c),
                prop::collection::vec(-10.0f64..10.0, c),
                prop::collection::vec(-10.0f64..10.0, r),
            )
                .prop_map(move |(data, z, u)| (DenseMatrix::new(r, c, data).unwrap(), z, u))
        })
    }

    proptest! {
        #[test]
        fn adjoint_identity((a, z, u) in matrix_and_vectors()) {
            let lhs = dot(&a.matvec(&z).unwrap(), &u);
            let rhs = dot(&z, &a.matvec_transposed(&u).unwrap());
            let scale = a.as_slice().iter().map(|v| v.abs()).sum::<f64>()
                * z.iter().map(|v| v.abs()).fold(0.0, f64::max)
                * u.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn augmented_column_is_ones((a, _z, _u) in matrix_and_vectors()) {
            let aug = a.augment_with_ones().unwrap();
            prop_assert_eq!(aug.cols(), a.cols() + 1);
            for r in 0..aug.rows() {
                prop_assert_eq!(aug.get(r, a.cols()), 1.0);
                prop_assert_eq!(&aug.row(r)[..a.cols()], a.row(r));
            }
        }
    }
}
