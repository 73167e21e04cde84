//! CSV ingestion, seeded stratified splitting and train-statistics scaling.
//!
//! Splits are drawn per class with a ChaCha8 generator seeded from the split
//! seed (class 0 shuffled first, then class 1 from the same stream). For a
//! class with `n` samples the training part takes `floor(train_fraction * n)`,
//! validation takes `floor(holdout_val_fraction * rest)` and test the remainder.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: DenseMatrix,
    /// 0 or 1 per row.
    pub y: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Row position of each sample in the source file (0-based, header excluded).
    pub row_ids: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(x: DenseMatrix, y: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::shape("LabeledDataset::new", x.rows(), y.len()));
        }
        if feature_names.len() != x.cols() {
            return Err(Error::shape("LabeledDataset::new", x.cols(), feature_names.len()));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::Input(format!("label {bad} is not binary")));
        }
        let row_ids = (0..y.len()).collect();
        Ok(Self {
            x,
            y,
            feature_names,
            row_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.y.iter().filter(|&&l| l == class).count()
    }

    /// Local row positions holding `class`, in row order.
    pub fn class_rows(&self, class: u8) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// `(C1, C2)`: the Class-0 and Class-1 blocks.
    pub fn class_blocks(&self) -> (DenseMatrix, DenseMatrix) {
        (
            self.x.select_rows(&self.class_rows(0)),
            self.x.select_rows(&self.class_rows(1)),
        )
    }

    /// Rows at local positions `rows`, keeping their source ids.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            feature_names: self.feature_names.clone(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
        }
    }

    /// Same samples with a different feature matrix.
    pub fn with_features(&self, x: DenseMatrix) -> Result<Self> {
        if x.rows() != self.len() || x.cols() != self.feature_names.len() {
            return Err(Error::shape("LabeledDataset::with_features", self.len(), x.rows()));
        }
        Ok(Self { x, ..self.clone() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub label_column: String,
    /// Label value mapped to Class 1; the other value becomes Class 0.
    pub positive_label: String,
    /// Columns dropped before parsing (ids and the like).
    pub ignore_columns: Vec<String>,
}

fn detect_delimiter(header: &str) -> u8 {
    if header.matches(';').count() > header.matches(',').count() {
        b';'
    } else {
        b','
    }
}

/// Reads a headered CSV (comma or semicolon separated) into a labeled dataset.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut first_line = String::new();
    BufReader::new(File::open(path).map_err(io_err)?)
        .read_line(&mut first_line)
        .map_err(io_err)?;
    let delimiter = detect_delimiter(&first_line);

    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let headers: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let label_idx = headers
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::Input(format!("{}: no label column `{}`", path.display(), opts.label_column)))?;
    for ignored in &opts.ignore_columns {
        if !headers.contains(ignored) {
            return Err(Error::Input(format!(
                "{}: no column `{ignored}` to ignore",
                path.display()
            )));
        }
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && !opts.ignore_columns.contains(&headers[i]))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Input(format!("{}: no feature columns", path.display())));
    }

    let mut data = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        // header is line 1
        let line = i + 2;
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let value: f64 = cell.parse().map_err(|_| Error::Cell {
                path: path.to_path_buf(),
                row: line,
                column: headers[c].clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Cell {
                    path: path.to_path_buf(),
                    row: line,
                    column: headers[c].clone(),
                    message: format!("`{cell}` is not finite"),
                });
            }
            data.push(value);
        }
        raw_labels.push(record.get(label_idx).unwrap_or("").to_string());
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() > 2 {
        return Err(Error::Input(format!(
            "{}: label column `{}` has {} distinct values, expected 2",
            path.display(),
            opts.label_column,
            distinct.len()
        )));
    }
    if distinct.len() < 2 {
        return Err(Error::Input(format!(
            "{}: label column `{}` is constant",
            path.display(),
            opts.label_column
        )));
    }
    if !distinct.contains(opts.positive_label.as_str()) {
        return Err(Error::Input(format!(
            "{}: positive label `{}` not among {:?}",
            path.display(),
            opts.positive_label,
            distinct
        )));
    }
    let y = raw_labels.iter().map(|l| u8::from(*l == opts.positive_label)).collect();
    let x = DenseMatrix::new(raw_labels.len(), feature_cols.len(), data)?;
    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    LabeledDataset::new(x, y, names)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    /// Share of the non-training rest that goes to validation.
    pub holdout_val_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.70,
            holdout_val_fraction: 0.60,
            seed: 42,
        }
    }
}

/// `floor(fraction * n)`, robust to products like `0.29 * 100 = 28.999...`.
fn floor_share(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("train_fraction", self.train_fraction),
            ("holdout_val_fraction", self.holdout_val_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes for a class of `n` samples.
    pub fn class_counts(&self, n: usize) -> (usize, usize, usize) {
        let train = floor_share(self.train_fraction, n);
        let rest = n - train;
        let val = floor_share(self.holdout_val_fraction, rest);
        (train, val, rest - val)
    }
}

/// Local row positions of each partition, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
    pub indices: SplitIndices,
}

pub fn split_indices(y: &[u8], spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SplitIndices {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for class in [0u8, 1] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        let (n_train, n_val, n_test) = spec.class_counts(rows.len());
        if n_train == 0 || n_val == 0 || n_test == 0 {
            return Err(Error::Input(format!(
                "class {class} with {} samples leaves an empty partition ({n_train}/{n_val}/{n_test})",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        out.train.extend_from_slice(&rows[..n_train]);
        out.validation.extend_from_slice(&rows[n_train..n_train + n_val]);
        out.test.extend_from_slice(&rows[n_train + n_val..]);
    }
    out.train.sort_unstable();
    out.validation.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

pub fn stratified_split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<DatasetSplit> {
    let indices = split_indices(&ds.y, spec)?;
    Ok(DatasetSplit {
        train: ds.subset(&indices.train),
        validation: ds.subset(&indices.validation),
        test: ds.subset(&indices.test),
        indices,
    })
}

/// Per-feature centering and scaling with training statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Sample standard deviation, or 1 for (numerically) constant features.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DenseMatrix) -> Self {
        let n = x.rows() as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = if x.rows() > 1 { (s / (n - 1.0)).sqrt() } else { 0.0 };
                if sd > 1e-12 * m.abs().max(1.0) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::shape("Standardizer::transform", self.mean.len(), x.cols()));
        }
        let mut data = Vec::with_capacity(x.rows() * x.cols());
        for row in x.row_iter() {
            data.extend(
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.scale)
                    .map(|((v, m), s)| (v - m) / s),
            );
        }
        DenseMatrix::new(x.rows(), x.cols(), data)
    }

    pub fn transform_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Scales `train` and every dataset in `others` with the statistics of `train`.
pub fn standardize(
    train: &LabeledDataset,
    others: &[&LabeledDataset],
) -> Result<(LabeledDataset, Vec<LabeledDataset>, Standardizer)> {
    let scaler = Standardizer::fit(&train.x);
    let scaled_train = train.with_features(scaler.transform(&train.x)?)?;
    let scaled_others = others
        .iter()
        .map(|ds| ds.with_features(scaler.transform(&ds.x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((scaled_train, scaled_others, scaler))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn opts(label: &str, positive: &str) -> CsvOptions {
        CsvOptions {
            label_column: label.into(),
            positive_label: positive.into(),
            ignore_columns: vec![],
        }
    }

    fn synthetic(n0: usize, n1: usize) -> LabeledDataset {
        let n = n0 + n1;
        let x = DenseMatrix::new(n, 2, (0..2 * n).map(|v| v as f64).collect()).unwrap();
        let y = (0..n).map(|i| u8::from(i >= n0)).collect();
        LabeledDataset::new(x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn loads_labels_and_features() {
        let f = write_tmp("f1,diagnosis,f2\n1.5,B,2\n-3,B,4e-1\n0,M,7\n");
        let ds = load_csv(f.path(), &opts("diagnosis", "M")).unwrap();
        assert_eq!(ds.y, vec![0, 0, 1]);
        assert_eq!(ds.feature_names, vec!["f1", "f2"]);
        assert_eq!(ds.x.row(1), &[-3.0, 0.4]);
    }

    #[test]
    fn semicolon_files_and_ignored_columns() {
        let f = write_tmp("id;x;label\n10;1,5;yes\n11;2;no\n");
        // "1,5" is not a number in this format
        assert!(matches!(
            load_csv(f.path(), &opts("label", "yes")),
            Err(Error::Cell { .. })
        ));
        let f = write_tmp("id;x;label\n10;1.5;yes\n11;2;no\n");
        let ds = load_csv(
            f.path(),
            &CsvOptions {
                ignore_columns: vec!["id".into()],
                ..opts("label", "yes")
            },
        )
        .unwrap();
        assert_eq!(ds.feature_names, vec!["x"]);
        assert_eq!(ds.y, vec![1, 0]);
    }

    #[test]
    fn malformed_cell_names_row_and_column() {
        let f = write_tmp("a,b,y\n1,2,0\n3,oops,1\n");
        let err = load_csv(f.path(), &opts("y", "1")).unwrap_err();
        match &err {
            Error::Cell { row, column, .. } => {
                assert_eq!(*row, 3);
                assert_eq!(column, "b");
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn label_errors() {
        let f = write_tmp("a,y\n1,x\n2,y\n3,z\n");
        assert!(load_csv(f.path(), &opts("y", "x"))
            .unwrap_err()
            .to_string()
            .contains("3 distinct"));
        let f = write_tmp("a,y\n1,x\n2,x\n");
        assert!(load_csv(f.path(), &opts("y", "x"))
            .unwrap_err()
            .to_string()
            .contains("constant"));
        let f = write_tmp("a,y\n1,x\n2,w\n");
        assert!(load_csv(f.path(), &opts("y", "q")).is_err());
        assert!(load_csv(f.path(), &opts("label", "x")).is_err());
        let missing = load_csv("/definitely/not/here.csv", &opts("y", "x")).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
        assert!(missing.to_string().contains("/definitely/not/here.csv"));
    }

    #[test]
    fn published_split_counts() {
        let spec = SplitSpec::default();
        assert_eq!(spec.class_counts(357), (249, 64, 44));
        assert_eq!(spec.class_counts(212), (148, 38, 26));
        let ovarian = SplitSpec {
            holdout_val_fraction: 0.70,
            ..spec
        };
        assert_eq!(ovarian.class_counts(91), (63, 19, 9));
        assert_eq!(ovarian.class_counts(162), (113, 34, 15));
    }

    #[test]
    fn small_split_is_a_partition() {
        let ds = synthetic(10, 10);
        let spec = SplitSpec {
            train_fraction: 0.5,
            holdout_val_fraction: 0.5,
            seed: 7,
        };
        let split = stratified_split(&ds, &spec).unwrap();
        for class in [0, 1] {
            assert_eq!(split.train.class_count(class), 5);
            let v = split.validation.class_count(class);
            let t = split.test.class_count(class);
            assert!((2..=3).contains(&v) && (2..=3).contains(&t) && v + t == 5);
        }
        let mut all: Vec<usize> = split
            .indices
            .train
            .iter()
            .chain(&split.indices.validation)
            .chain(&split.indices.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert_eq!(split.train.row_ids, split.indices.train);
    }

    #[test]
    fn split_sweep_over_seeds() {
        let ds = synthetic(20, 30);
        for seed in 0..100 {
            let spec = SplitSpec {
                seed,
                ..SplitSpec::default()
            };
            let idx = split_indices(&ds.y, &spec).unwrap();
            let mut seen = vec![0u8; ds.len()];
            for &i in idx.train.iter().chain(&idx.validation).chain(&idx.test) {
                seen[i] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "seed {seed}");
            let train_class0 = idx.train.iter().filter(|&&i| ds.y[i] == 0).count();
            assert_eq!(train_class0, 14);
            assert_eq!(idx.train.len() - train_class0, 21);
            assert_eq!(idx, split_indices(&ds.y, &spec).unwrap());
        }
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let ds = synthetic(2, 10);
        assert!(stratified_split(&ds, &SplitSpec::default()).is_err());
        let bad = SplitSpec {
            train_fraction: 1.0,
            ..SplitSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn standardize_uses_train_statistics() {
        let train = LabeledDataset::new(
            DenseMatrix::from_rows(&[[1.0, 5.0, 2.0], [3.0, 5.0, 4.0], [2.0, 5.0, 9.0]]).unwrap(),
            vec![0, 1, 0],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let val = LabeledDataset::new(
            DenseMatrix::from_rows(&[[2.0, 7.0, 5.0]]).unwrap(),
            vec![1],
            train.feature_names.clone(),
        )
        .unwrap();
        let (t, others, scaler) = standardize(&train, &[&val]).unwrap();
        assert_eq!(scaler.mean[0], 2.0);
        assert_eq!(scaler.scale[0], 1.0);
        assert_eq!(scaler.scale[1], 1.0);
        for c in 0..3 {
            let mean: f64 = (0..3).map(|r| t.x.get(r, c)).sum::<f64>() / 3.0;
            assert!(mean.abs() <= 1e-12);
        }
        assert_eq!((0..3).map(|r| t.x.get(r, 1)).collect::<Vec<_>>(), vec![0.0; 3]);
        assert_eq!(others[0].x.get(0, 0), 0.0);
        assert_eq!(others[0].x.get(0, 2), 0.0);
    }
}
