//! Tabular CSV ingestion driven by a small schema file.
//!
//! The schema is TOML:
//!
//! ```toml
//! task = "classification"   # or "regression"
//!
//! [columns]
//! y = "target"
//! job = "categorical"
//! id = "ignore"
//! # unlisted columns are numeric
//! ```
//!
//! Categorical columns are one-hot encoded with levels in sorted order;
//! classification labels are indexed the same way.

use super::{DataError, Dataset, Targets};
use crate::dense::Matrix;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Target,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    #[default]
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    #[serde(default)]
    pub task: TaskKind,
    pub columns: BTreeMap<String, ColumnKind>,
}

impl CsvSchema {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let schema: CsvSchema =
            toml::from_str(text).map_err(|e| DataError::Schema(e.to_string()))?;
        let targets = schema
            .columns
            .values()
            .filter(|k| **k == ColumnKind::Target)
            .count();
        if targets != 1 {
            return Err(DataError::Schema(format!(
                "exactly one target column required, found {targets}"
            )));
        }
        Ok(schema)
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        Self::parse(&read_text(path)?)
    }

    pub fn target(&self) -> &str {
        self.columns
            .iter()
            .find(|(_, k)| **k == ColumnKind::Target)
            .map(|(name, _)| name.as_str())
            .expect("validated in parse")
    }

    fn kind_of(&self, column: &str) -> ColumnKind {
        self.columns
            .get(column)
            .copied()
            .unwrap_or(ColumnKind::Numeric)
    }
}

fn read_text(path: &Path) -> Result<String, DataError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads `path` using the schema file at `schema_path`.
pub fn load_csv(path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let schema = CsvSchema::from_file(schema_path.as_ref())?;
    load_csv_with_schema(path, &schema)
}

pub fn load_csv_with_schema(
    path: impl AsRef<Path>,
    schema: &CsvSchema,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let target = schema.target();
    let Some(target_col) = header.iter().position(|h| h == target) else {
        return Err(DataError::UnknownTargetColumn(target.to_string()));
    };
    if let Some(missing) = schema.columns.keys().find(|c| !header.contains(c)) {
        return Err(DataError::UnknownSchemaColumn(missing.clone()));
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        // rows are numbered from 1, excluding the header
        let row = r + 1;
        if record.len() != header.len() {
            return Err(DataError::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        for (c, f) in fields.iter().enumerate() {
            if f.is_empty() && schema.kind_of(&header[c]) != ColumnKind::Ignore {
                return Err(DataError::MissingValue {
                    row,
                    column: header[c].clone(),
                });
            }
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }

    let parse_num = |row: usize, col: usize, s: &str| -> Result<f64, DataError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| DataError::BadNumber {
                row,
                column: header[col].clone(),
                value: s.to_string(),
            })
    };

    // column plan: numeric passthrough or one-hot levels
    enum Plan {
        Numeric(usize),
        OneHot(usize, Vec<String>),
    }
    let mut plan = Vec::new();
    let mut names = Vec::new();
    for (c, h) in header.iter().enumerate() {
        match schema.kind_of(h) {
            ColumnKind::Numeric => {
                plan.push(Plan::Numeric(c));
                names.push(h.clone());
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = rows.iter().map(|r| r[c].as_str()).collect();
                let levels: Vec<String> = levels.into_iter().map(str::to_string).collect();
                names.extend(levels.iter().map(|l| format!("{h}={l}")));
                plan.push(Plan::OneHot(c, levels));
            }
            ColumnKind::Target | ColumnKind::Ignore => {}
        }
    }
    if names.is_empty() {
        return Err(DataError::Schema("no feature columns".into()));
    }

    let mut feats = Vec::with_capacity(rows.len() * names.len());
    for (r, fields) in rows.iter().enumerate() {
        for p in &plan {
            match p {
                Plan::Numeric(c) => feats.push(parse_num(r + 1, *c, &fields[*c])?),
                Plan::OneHot(c, levels) => {
                    feats.extend(levels.iter().map(|l| f64::from(u8::from(*l == fields[*c]))))
                }
            }
        }
    }
    let features = Matrix::new(rows.len(), names.len(), feats)?;

    let targets = match schema.task {
        TaskKind::Classification => {
            let classes: BTreeSet<&str> = rows.iter().map(|r| r[target_col].as_str()).collect();
            let classes: Vec<String> = classes.into_iter().map(str::to_string).collect();
            let labels = rows
                .iter()
                .map(|r| classes.iter().position(|c| *c == r[target_col]).unwrap())
                .collect();
            Targets::Classes {
                labels,
                num_classes: classes.len(),
                names: classes,
            }
        }
        TaskKind::Regression => {
            let values = rows
                .iter()
                .enumerate()
                .map(|(r, f)| parse_num(r + 1, target_col, &f[target_col]))
                .collect::<Result<Vec<_>, _>>()?;
            Targets::Values(Matrix::new(rows.len(), 1, values)?)
        }
    };
    Dataset::new(features, targets, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    const REGRESSION: &str = "task = \"regression\"\n[columns]\ny = \"target\"\n";

    #[test]
    fn numeric_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(&dir, "a.csv", "a,b,y\n1.5,-2,0.25\n3,4e-3,7\n");
        let schema = write(&dir, "s.toml", REGRESSION);
        let ds = load_csv(&csv, &schema).unwrap();
        assert_eq!(ds.features.data(), &[1.5, -2.0, 3.0, 4e-3]);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        let Targets::Values(y) = &ds.targets else {
            unreachable!()
        };
        assert_eq!(y.data(), &[0.25, 7.0]);
    }

    #[test]
    fn categorical_one_hot() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write(
            &dir,
            "c.csv",
            "color,size,label\nred,1,yes\nblue,2,no\ngreen,3,yes\nred,4,no\n",
        );
        let schema = write(
            &dir,
            "s.toml",
            "[columns]\ncolor = \"categorical\"\nlabel = \"target\"\n",
        );
        let ds = load_csv(&csv, &schema).unwrap();
        assert_eq!(ds.input_dim(), 4);
        assert_eq!(
            ds.feature_names,
            vec!["color=blue", "color=green", "color=red", "size"]
        );
        assert_eq!(ds.features.row(0), &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(ds.features.row(1), &[1.0, 0.0, 0.0, 2.0]);
        let Targets::Classes { labels, names, .. } = &ds.targets else {
            unreachable!()
        };
        assert_eq!(names, &["no", "yes"]);
        assert_eq!(labels, &[1, 0, 1, 0]);
    }

    #[test]
    fn distinct_errors() {
        let dir = tempfile::tempdir().unwrap();
        let schema = write(&dir, "s.toml", REGRESSION);
        assert!(matches!(
            load_csv(dir.path().join("nope.csv"), &schema),
            Err(DataError::MissingFile(_))
        ));
        let ragged = write(&dir, "r.csv", "a,y\n1,2\n3\n");
        assert!(matches!(
            load_csv(&ragged, &schema),
            Err(DataError::RaggedRow { row: 2, .. })
        ));
        let missing = write(&dir, "m.csv", "a,y\n1,2\n3,4\n,5\n");
        match load_csv(&missing, &schema) {
            Err(DataError::MissingValue { row, column }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
            }
            other => panic!("{other:?}"),
        }
        let no_target = write(&dir, "t.csv", "a,b\n1,2\n");
        assert!(matches!(
            load_csv(&no_target, &schema),
            Err(DataError::UnknownTargetColumn(_))
        ));
        let bad_num = write(&dir, "n.csv", "a,y\nfoo,1\n");
        assert!(matches!(
            load_csv(&bad_num, &schema),
            Err(DataError::BadNumber { row: 1, .. })
        ));
    }

    #[test]
    fn schema_validation() {
        assert!(CsvSchema::parse("[columns]\na = \"numeric\"\n").is_err());
        assert!(CsvSchema::parse("[columns]\na = \"target\"\nb = \"target\"\n").is_err());
        assert!(CsvSchema::parse("[columns]\na = \"wat\"\n").is_err());
        assert!(CsvSchema::parse("tsk = 1\n[columns]\na = \"target\"\n").is_err());
    }
}
