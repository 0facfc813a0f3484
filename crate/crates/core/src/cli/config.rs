//! Run configuration files.
//!
//! ```toml
//! seed = 0
//! out_dir = "runs/f1"
//!
//! [model]
//! family = "lcn"        # mlp | lcn | kan
//! widths = [8]
//! num_basis = 16
//! degree = 3
//!
//! [train]
//! epochs = 50
//! learning_rate = 1e-2
//!
//! [data]
//! kind = "symbolic"     # symbolic | csv | idx
//! task = "f1"
//! samples = 2000
//! ```
//!
//! Unknown keys are rejected. Every omitted value takes the default listed on
//! its field.

use crate::analysis::{BudgetOptions, Family};
use crate::data::{
    gen_symbolic, load_csv, load_idx, minmax_normalize, split, DataError, Dataset, SymbolicFn,
    SymbolicTask,
};
use crate::network::{Activation, ArchSpec, LayerSpec, DEFAULT_KNOT_DOMAIN};
use crate::training::{Loss, OptimizerKind, TrainConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}:{line}: `{key}`: {message}")]
    Invalid {
        path: String,
        line: usize,
        key: String,
        message: String,
    },
    #[error("`{key}`: {message}")]
    Missing { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Symbolic,
    Csv,
    Idx,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// `lcn`.
    pub family: Family,
    /// `[8]`.
    pub widths: Vec<usize>,
    /// `8`.
    pub num_basis: usize,
    /// `3`.
    pub degree: usize,
    /// `[-1, 1]`.
    pub domain: (f64, f64),
    /// `relu`, MLP only.
    pub activation: Activation,
    /// Checkpoint to evaluate; `eval` defaults to `<out_dir>/checkpoint.lcn`.
    pub checkpoint: Option<Spanned<PathBuf>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: Family::Lcn,
            widths: vec![8],
            num_basis: 8,
            degree: 3,
            domain: DEFAULT_KNOT_DOMAIN,
            activation: Activation::Relu,
            checkpoint: None,
        }
    }
}

impl ModelConfig {
    pub fn arch(&self, input_dim: usize, output_dim: usize) -> ArchSpec {
        let hidden = self
            .widths
            .iter()
            .map(|&w| match self.family {
                Family::Mlp => LayerSpec::mlp(w, self.activation),
                Family::Lcn => LayerSpec::Lcn {
                    width: w,
                    num_basis: self.num_basis,
                    degree: self.degree,
                    domain: self.domain,
                },
                Family::Kan => LayerSpec::KanEdge {
                    width: w,
                    num_basis: self.num_basis,
                    degree: self.degree,
                    domain: self.domain,
                },
            })
            .collect();
        ArchSpec::new(input_dim, hidden, output_dim)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// `10`.
    pub epochs: usize,
    /// `32`.
    pub batch_size: usize,
    /// `1e-3`.
    pub learning_rate: f64,
    /// `adam`.
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Softmax cross-entropy for classes, MSE otherwise.
    pub loss: Option<Loss>,
    /// `true`.
    pub shuffle: bool,
    pub max_steps: Option<usize>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            beta1: t.beta1,
            beta2: t.beta2,
            eps: t.eps,
            loss: t.loss,
            shuffle: t.shuffle,
            max_steps: t.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub kind: Option<DataKind>,
    /// Symbolic task id, `f1` to `f5`.
    pub task: Option<String>,
    /// `2000`, symbolic only.
    pub samples: usize,
    /// `0`, symbolic only.
    pub noise: f64,
    pub path: Option<Spanned<PathBuf>>,
    pub schema: Option<Spanned<PathBuf>>,
    pub images: Option<Spanned<PathBuf>>,
    pub labels: Option<Spanned<PathBuf>>,
    pub test_images: Option<Spanned<PathBuf>>,
    pub test_labels: Option<Spanned<PathBuf>>,
    /// Keep only the first rows of the loaded data.
    pub limit: Option<usize>,
    /// `0.2`. Held-out fraction when no separate test files are given.
    pub test_fraction: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            kind: None,
            task: None,
            samples: 2000,
            noise: 0.0,
            path: None,
            schema: None,
            images: None,
            labels: None,
            test_images: None,
            test_labels: None,
            limit: None,
            test_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `["mlp", "lcn", "kan"]`.
    pub families: Vec<Family>,
    pub budgets: Vec<usize>,
    /// `[0]`.
    pub seeds: Vec<u64>,
    pub threads: Option<usize>,
    pub builder: BudgetOptions,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            budgets: Vec::new(),
            seeds: vec![0],
            threads: None,
            builder: BudgetOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `0`.
    pub seed: u64,
    /// `runs/latest`.
    pub out_dir: PathBuf,
    pub model: ModelConfig,
    pub train: TrainSection,
    pub data: DataConfig,
    pub sweep: SweepSection,
    /// Source file, for error messages.
    #[serde(skip)]
    pub source: Option<(String, String)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("runs/latest"),
            model: ModelConfig::default(),
            train: TrainSection::default(),
            data: DataConfig::default(),
            sweep: SweepSection::default(),
            source: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub family: Option<Family>,
    pub widths: Option<Vec<usize>>,
    pub num_basis: Option<usize>,
    pub degree: Option<usize>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub max_steps: Option<usize>,
    pub task: Option<String>,
    pub samples: Option<usize>,
    pub checkpoint: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.source = Some((origin.to_string(), text.to_string()));
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) {
        let spanless = |p: &PathBuf| Spanned::new(0..0, p.clone());
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = o.family {
            self.model.family = v;
        }
        if let Some(v) = &o.widths {
            self.model.widths = v.clone();
        }
        if let Some(v) = o.num_basis {
            self.model.num_basis = v;
        }
        if let Some(v) = o.degree {
            self.model.degree = v;
        }
        if let Some(v) = &o.checkpoint {
            self.model.checkpoint = Some(spanless(v));
        }
        if let Some(v) = o.epochs {
            self.train.epochs = v;
        }
        if let Some(v) = o.batch_size {
            self.train.batch_size = v;
        }
        if let Some(v) = o.learning_rate {
            self.train.learning_rate = v;
        }
        if let Some(v) = o.optimizer {
            self.train.optimizer = v;
        }
        if let Some(v) = o.max_steps {
            self.train.max_steps = Some(v);
        }
        if let Some(v) = &o.task {
            self.data.kind = Some(DataKind::Symbolic);
            self.data.task = Some(v.clone());
        }
        if let Some(v) = o.samples {
            self.data.samples = v;
        }
    }

    fn invalid<T>(&self, span: Option<std::ops::Range<usize>>, key: &str, message: String) -> Result<T, ConfigError> {
        match (&self.source, span) {
            (Some((path, text)), Some(span)) if span.end > 0 => Err(ConfigError::Invalid {
                path: path.clone(),
                line: line_of(text, span.start),
                key: key.to_string(),
                message,
            }),
            _ => Err(ConfigError::Missing {
                key: key.to_string(),
                message,
            }),
        }
    }

    /// Line lookup for a top-level or dotted key, used for values that carry
    /// no span of their own.
    fn key_line(&self, key: &str) -> Option<std::ops::Range<usize>> {
        let (_, text) = self.source.as_ref()?;
        let leaf = key.rsplit('.').next()?;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let t = line.trim_start();
            if t.starts_with(leaf) && t[leaf.len()..].trim_start().starts_with('=') {
                return Some(offset..offset + line.len());
            }
            offset += line.len();
        }
        None
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            beta1: t.beta1,
            beta2: t.beta2,
            eps: t.eps,
            loss: t.loss,
            seed: self.seed,
            shuffle: t.shuffle,
            max_steps: t.max_steps,
        }
    }

    /// Checks values that the file format alone cannot: model shape, training
    /// hyperparameters and that referenced files exist.
    pub fn validate(&self, needs_data: bool) -> Result<(), ConfigError> {
        if self.model.family != Family::Mlp && self.model.num_basis < self.model.degree + 1 {
            return self.invalid(
                self.key_line("model.num_basis"),
                "model.num_basis",
                format!(
                    "{} basis functions cannot carry degree {}",
                    self.model.num_basis, self.model.degree
                ),
            );
        }
        if self.model.widths.contains(&0) {
            return self.invalid(self.key_line("model.widths"), "model.widths", "widths must be positive".into());
        }
        if let Err(crate::training::TrainError::InvalidConfig(m)) = self.train_config().validate() {
            let key = if m.contains("batch") {
                "train.batch_size"
            } else if m.contains("learning") {
                "train.learning_rate"
            } else {
                "train.beta1"
            };
            return self.invalid(self.key_line(key), key, m);
        }
        if let Some(cp) = &self.model.checkpoint {
            self.check_exists(cp, "model.checkpoint")?;
        }
        if needs_data {
            self.validate_data()?;
        }
        Ok(())
    }

    fn check_exists(&self, p: &Spanned<PathBuf>, key: &str) -> Result<(), ConfigError> {
        if !p.get_ref().exists() {
            return self.invalid(
                Some(p.span()),
                key,
                format!("file not found: {}", p.get_ref().display()),
            );
        }
        Ok(())
    }

    fn require<'a>(&self, v: &'a Option<Spanned<PathBuf>>, key: &str) -> Result<&'a Spanned<PathBuf>, ConfigError> {
        match v {
            Some(p) => {
                self.check_exists(p, key)?;
                Ok(p)
            }
            None => self.invalid(None, key, "required for this data kind".into()),
        }
    }

    fn validate_data(&self) -> Result<(), ConfigError> {
        let d = &self.data;
        if !(d.test_fraction > 0.0 && d.test_fraction < 1.0) {
            return self.invalid(self.key_line("data.test_fraction"), "data.test_fraction", "must lie in (0, 1)".into());
        }
        match d.kind {
            None => self.invalid(None, "data.kind", "no dataset configured (symbolic, csv or idx)".into()),
            Some(DataKind::Symbolic) => {
                let Some(task) = &d.task else {
                    return self.invalid(None, "data.task", "symbolic data needs a task id".into());
                };
                if task.parse::<SymbolicFn>().is_err() {
                    return self.invalid(self.key_line("data.task"), "data.task", format!("unknown task '{task}' (f1 to f5)"));
                }
                Ok(())
            }
            Some(DataKind::Csv) => {
                self.require(&d.path, "data.path")?;
                self.require(&d.schema, "data.schema")?;
                Ok(())
            }
            Some(DataKind::Idx) => {
                self.require(&d.images, "data.images")?;
                self.require(&d.labels, "data.labels")?;
                if d.test_images.is_some() != d.test_labels.is_some() {
                    return self.invalid(None, "data.test_labels", "test_images and test_labels go together".into());
                }
                if let (Some(i), Some(l)) = (&d.test_images, &d.test_labels) {
                    self.check_exists(i, "data.test_images")?;
                    self.check_exists(l, "data.test_labels")?;
                }
                Ok(())
            }
        }
    }

    /// Train and test sets. Deterministic given the config seed.
    pub fn load_data(&self) -> Result<(Dataset, Dataset), DataError> {
        let d = &self.data;
        let limit = |ds: Dataset| match d.limit {
            Some(n) if n < ds.len() => ds.head(n),
            _ => Ok(ds),
        };
        match d.kind {
            Some(DataKind::Symbolic) => {
                let f: SymbolicFn = d.task.as_deref().unwrap_or("").parse()?;
                let task = SymbolicTask {
                    function: f,
                    samples: d.samples,
                    noise: d.noise,
                };
                split(&gen_symbolic(&task, self.seed)?, 1.0 - d.test_fraction, self.seed)
            }
            Some(DataKind::Csv) => {
                let path = d.path.as_ref().map(|p| p.get_ref().clone()).unwrap_or_default();
                let schema = d.schema.as_ref().map(|p| p.get_ref().clone()).unwrap_or_default();
                let ds = minmax_normalize(&limit(load_csv(path, schema)?)?);
                split(&ds, 1.0 - d.test_fraction, self.seed)
            }
            Some(DataKind::Idx) => {
                let get = |p: &Option<Spanned<PathBuf>>| p.as_ref().map(|p| p.get_ref().clone()).unwrap_or_default();
                let train = limit(load_idx(get(&d.images), get(&d.labels))?)?;
                match (&d.test_images, &d.test_labels) {
                    (Some(_), Some(_)) => {
                        let test = load_idx(get(&d.test_images), get(&d.test_labels))?;
                        Ok((train, test))
                    }
                    _ => split(&train, 1.0 - d.test_fraction, self.seed),
                }
            }
            None => Err(DataError::Invalid("no dataset configured".into())),
        }
    }
}
