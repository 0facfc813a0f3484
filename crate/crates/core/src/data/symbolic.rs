//! Built-in symbolic-regression tasks.
//!
//! | id | function | box |
//! |----|----------|-----|
//! | f1 | `sin(2πx)` | `[0, 1]` |
//! | f2 | `x·y` | `[-1, 1]²` |
//! | f3 | `exp(-(x² + y²))` | `[-1, 1]²` |
//! | f4 | `sin(πx) + y²` | `[-1, 1]²` |
//! | f5 | `Σ sin(πx_i) / 4` | `[-1, 1]⁴` |
//!
//! Features are the sampled points mapped affinely from the box onto
//! `[0, 1]^D`. Targets are `f(x) + noise`, mapped from the analytic range of
//! `f` over the box onto `[0, 1]`.

use super::{ColumnRange, DataError, Dataset, Targets};
use crate::dense::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicFn {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl FromStr for SymbolicFn {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            "f5" => Ok(Self::F5),
            other => Err(DataError::UnknownTask(other.to_string())),
        }
    }
}

impl SymbolicFn {
    pub const ALL: [SymbolicFn; 5] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5];

    pub fn id(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            Self::F1 => 1,
            Self::F2 | Self::F3 | Self::F4 => 2,
            Self::F5 => 4,
        }
    }

    /// Sampling interval shared by every coordinate.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Self::F1 => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }

    /// Exact range of the function over its box.
    pub fn range(self) -> (f64, f64) {
        match self {
            Self::F1 | Self::F2 | Self::F5 => (-1.0, 1.0),
            Self::F3 => ((-2.0f64).exp(), 1.0),
            Self::F4 => (-1.0, 2.0),
        }
    }

    /// The raw function value, before any scaling.
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Self::F1 => (2.0 * PI * x[0]).sin(),
            Self::F2 => x[0] * x[1],
            Self::F3 => (-(x[0] * x[0] + x[1] * x[1])).exp(),
            Self::F4 => (PI * x[0]).sin() + x[1] * x[1],
            Self::F5 => x.iter().map(|v| (PI * v).sin()).sum::<f64>() / 4.0,
        }
    }

    /// `eval` on a point already mapped into `[0, 1]^D`, scaled to `[0, 1]`.
    pub fn eval_normalized(self, unit: &[f64]) -> f64 {
        let (lo, hi) = self.domain();
        let x: Vec<f64> = unit.iter().map(|u| lo + u * (hi - lo)).collect();
        let (ylo, yhi) = self.range();
        (self.eval(&x) - ylo) / (yhi - ylo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolicTask {
    pub function: SymbolicFn,
    pub samples: usize,
    /// Standard deviation of additive Gaussian noise, in raw units.
    pub noise: f64,
}

impl SymbolicTask {
    pub fn new(function: SymbolicFn, samples: usize) -> Self {
        Self {
            function,
            samples,
            noise: 0.0,
        }
    }
}

pub fn gen_symbolic(task: &SymbolicTask, seed: u64) -> Result<Dataset, DataError> {
    if task.samples == 0 {
        return Err(DataError::Empty);
    }
    if !(task.noise >= 0.0 && task.noise.is_finite()) {
        return Err(DataError::Invalid(format!("noise {} must be >= 0", task.noise)));
    }
    let f = task.function;
    let d = f.input_dim();
    let (lo, hi) = f.domain();
    let (ylo, yhi) = f.range();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, task.noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut feats = Vec::with_capacity(task.samples * d);
    let mut ys = Vec::with_capacity(task.samples);
    for _ in 0..task.samples {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
        let noise = if task.noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        ys.push((f.eval(&x) + noise - ylo) / (yhi - ylo));
        feats.extend(x.iter().map(|v| (v - lo) / (hi - lo)));
    }
    let mut ds = Dataset::new(
        Matrix::new(task.samples, d, feats)?,
        Targets::Values(Matrix::new(task.samples, 1, ys)?),
        (1..=d).map(|i| format!("x{i}")).collect(),
    )?;
    ds.normalization = Some(vec![ColumnRange { min: lo, max: hi }; d]);
    Ok(ds)
}
