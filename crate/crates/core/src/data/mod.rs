//! Datasets: tabular CSV, IDX image files and synthetic symbolic-regression
//! tasks, all normalized into the unit hypercube.

mod csv_loader;
mod idx;
mod symbolic;

pub use csv_loader::{load_csv, load_csv_with_schema, ColumnKind, CsvSchema, TaskKind};
pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx, parse_idx_images, parse_idx_labels, write_idx,
    IdxImages, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC,
};
pub use symbolic::{gen_symbolic, SymbolicFn, SymbolicTask};

use crate::dense::{Matrix, ShapeError};
use crate::training::loss::Target;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: missing value in column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: column `{column}` value `{value}` is not a number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("target column `{0}` is not in the CSV header")]
    UnknownTargetColumn(String),
    #[error("schema names column `{0}` which is not in the CSV header")]
    UnknownSchemaColumn(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("IDX file has magic {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("IDX file truncated: needed {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {0} outside 0..=9")]
    InvalidLabel(u8),
    #[error("dataset is empty")]
    Empty,
    #[error("unknown symbolic task `{0}`")]
    UnknownTask(String),
    #[error("invalid split fraction {0}")]
    BadFraction(f64),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Per-column range seen before normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Classes {
        labels: Vec<usize>,
        num_classes: usize,
        /// Display name per class index.
        names: Vec<String>,
    },
    /// One row of regression targets per sample.
    Values(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub targets: Targets,
    pub feature_names: Vec<String>,
    pub normalization: Option<Vec<ColumnRange>>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        targets: Targets,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let n = features.rows();
        let target_rows = match &targets {
            Targets::Classes {
                labels,
                num_classes,
                names,
            } => {
                if let Some(bad) = labels.iter().find(|l| **l >= *num_classes) {
                    return Err(DataError::Invalid(format!(
                        "label {bad} outside {num_classes} classes"
                    )));
                }
                if names.len() != *num_classes {
                    return Err(DataError::Invalid("class name count".into()));
                }
                labels.len()
            }
            Targets::Values(m) => m.rows(),
        };
        if target_rows != n {
            return Err(DataError::Invalid(format!(
                "{n} feature rows but {target_rows} targets"
            )));
        }
        if feature_names.len() != features.cols() {
            return Err(DataError::Invalid(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.cols()
            )));
        }
        Ok(Self {
            features,
            targets,
            feature_names,
            normalization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.features.cols()
    }

    /// Network output width needed for this dataset.
    pub fn output_dim(&self) -> usize {
        match &self.targets {
            Targets::Classes { num_classes, .. } => *num_classes,
            Targets::Values(m) => m.cols(),
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.targets, Targets::Classes { .. })
    }

    pub fn features_of(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn target_of(&self, i: usize) -> Target<'_> {
        match &self.targets {
            Targets::Classes { labels, .. } => Target::Class(labels[i]),
            Targets::Values(m) => Target::Values(m.row(i)),
        }
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset, DataError> {
        if indices.is_empty() {
            return Err(DataError::Empty);
        }
        let d = self.input_dim();
        let mut feats = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            feats.extend_from_slice(self.features.row(i));
        }
        let targets = match &self.targets {
            Targets::Classes {
                labels,
                num_classes,
                names,
            } => Targets::Classes {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                num_classes: *num_classes,
                names: names.clone(),
            },
            Targets::Values(m) => {
                let mut v = Vec::with_capacity(indices.len() * m.cols());
                for &i in indices {
                    v.extend_from_slice(m.row(i));
                }
                Targets::Values(Matrix::new(indices.len(), m.cols(), v)?)
            }
        };
        Ok(Dataset {
            features: Matrix::new(indices.len(), d, feats)?,
            targets,
            feature_names: self.feature_names.clone(),
            normalization: self.normalization.clone(),
        })
    }

    /// First `n` rows (or all of them).
    pub fn head(&self, n: usize) -> Result<Dataset, DataError> {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }
}

/// Per-column `(x - min) / (max - min)`; constant columns become 0.5.
///
/// The returned dataset records the ranges of the input.
pub fn minmax_normalize(ds: &Dataset) -> Dataset {
    let ranges: Vec<ColumnRange> = (0..ds.input_dim())
        .map(|c| {
            let (min, max) = (0..ds.len())
                .map(|r| ds.features.get(r, c))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            ColumnRange { min, max }
        })
        .collect();
    let mut out = normalize_with(ds, &ranges);
    out.normalization = Some(ranges);
    out
}

/// Applies previously computed ranges, clamping into `[0, 1]`.
pub fn normalize_with(ds: &Dataset, ranges: &[ColumnRange]) -> Dataset {
    let mut features = ds.features.clone();
    let cols = features.cols();
    for (k, v) in features.data_mut().iter_mut().enumerate() {
        let r = ranges[k % cols];
        *v = if r.max > r.min {
            ((*v - r.min) / (r.max - r.min)).clamp(0.0, 1.0)
        } else {
            0.5
        };
    }
    Dataset {
        features,
        targets: ds.targets.clone(),
        feature_names: ds.feature_names.clone(),
        normalization: Some(ranges.to_vec()),
    }
}

/// Deterministic train/test split. Classification data is stratified: each
/// class contributes `round(fraction * count)` rows to the training side.
/// Both sides keep the original row order.
pub fn split(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::BadFraction(fraction));
    }
    if ds.is_empty() {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = match &ds.targets {
        Targets::Classes {
            labels,
            num_classes,
            ..
        } => {
            let mut g = vec![Vec::new(); *num_classes];
            for (i, &l) in labels.iter().enumerate() {
                g[l].push(i);
            }
            g
        }
        Targets::Values(_) => vec![(0..ds.len()).collect()],
    };
    let mut in_train = vec![false; ds.len()];
    for mut group in groups {
        group.shuffle(&mut rng);
        let take = (fraction * group.len() as f64).round() as usize;
        for &i in &group[..take] {
            in_train[i] = true;
        }
    }
    let train: Vec<usize> = (0..ds.len()).filter(|&i| in_train[i]).collect();
    let test: Vec<usize> = (0..ds.len()).filter(|&i| !in_train[i]).collect();
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column_dataset(values: &[f64]) -> Dataset {
        Dataset::new(
            Matrix::new(values.len(), 1, values.to_vec()).unwrap(),
            Targets::Values(Matrix::new(values.len(), 1, vec![0.0; values.len()]).unwrap()),
            vec!["x".into()],
        )
        .unwrap()
    }

    fn balanced(n: usize) -> Dataset {
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::new(
            Matrix::new(n, 1, (0..n).map(|i| i as f64).collect()).unwrap(),
            Targets::Classes {
                labels,
                num_classes: 2,
                names: vec!["a".into(), "b".into()],
            },
            vec!["i".into()],
        )
        .unwrap()
    }

    #[test]
    fn minmax_basic() {
        let n = minmax_normalize(&column_dataset(&[0.0, 5.0, 10.0]));
        assert_eq!(n.features.data(), &[0.0, 0.5, 1.0]);
        assert_eq!(n.normalization.unwrap()[0], ColumnRange { min: 0.0, max: 10.0 });
    }

    #[test]
    fn constant_column_maps_to_half() {
        let n = minmax_normalize(&column_dataset(&[3.0, 3.0, 3.0]));
        assert_eq!(n.features.data(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn stratified_split_counts() {
        let (train, test) = split(&balanced(100), 0.8, 1).unwrap();
        let Targets::Classes { labels, .. } = &train.targets else {
            unreachable!()
        };
        assert_eq!(labels.iter().filter(|l| **l == 0).count(), 40);
        assert_eq!(labels.iter().filter(|l| **l == 1).count(), 40);
        assert_eq!(test.len(), 20);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        assert!(matches!(split(&balanced(10), 1.0, 0), Err(DataError::BadFraction(_))));
        assert!(split(&balanced(10), 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(values in proptest::collection::vec(-1e3f64..1e3, 1..40)) {
            let once = minmax_normalize(&column_dataset(&values));
            let twice = minmax_normalize(&once);
            prop_assert_eq!(once.features, twice.features);
        }

        #[test]
        fn split_is_a_partition(n in 10usize..120, fraction in 0.2f64..0.8, seed in 0u64..1000) {
            let ds = balanced(n);
            let (train, test) = split(&ds, fraction, seed).unwrap();
            let mut seen: Vec<f64> = train.features.data().iter().chain(test.features.data()).copied().collect();
            seen.sort_by(f64::total_cmp);
            let all: Vec<f64> = (0..n).map(|i| i as f64).collect();
            prop_assert_eq!(seen, all);
            let (train2, _) = split(&ds, fraction, seed).unwrap();
            prop_assert_eq!(train, train2);
        }
    }
}
