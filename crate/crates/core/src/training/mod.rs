//! Mini-batch training, evaluation and a small hyperparameter grid search.

pub mod loss;
pub mod optim;

pub use loss::{mse_loss, softmax_xent, Loss, LossError, Target};
pub use optim::{sgd_step, AdamConfig, AdamState, Optimizer, OptimizerKind};

use crate::backprop::{sample_gradient, BackpropError, GradientTape};
use crate::data::Dataset;
use crate::network::{init_network, ArchSpec, Network, NetworkError};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Samples per parallel work unit inside a batch. Fixed so the gradient
/// reduction order does not depend on the thread count.
const REDUCE_CHUNK: usize = 8;

pub const METRICS_HEADER: &str = "epoch,train_loss,train_acc,test_acc,seconds,frac_clamped";

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Backprop(#[from] BackpropError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("dataset has {data} {what}, network has {net}")]
    DimMismatch {
        what: &'static str,
        data: usize,
        net: usize,
    },
    #[error("cannot evaluate on an empty dataset")]
    EmptyDataset,
    #[error("training diverged at epoch {epoch}, step {step}: loss = {loss}")]
    Diverged { epoch: usize, step: usize, loss: f64 },
    #[error("metrics i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// `None` picks softmax cross-entropy for class targets and MSE otherwise.
    pub loss: Option<Loss>,
    pub seed: u64,
    pub shuffle: bool,
    /// Stop after this many optimizer steps, even mid-epoch.
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            loss: None,
            seed: 0,
            shuffle: true,
            max_steps: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        // zero is allowed: it must leave the parameters untouched
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("adam betas must lie in (0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("adam eps must be positive");
        }
        Ok(())
    }

    pub fn loss_for(&self, ds: &Dataset) -> Loss {
        self.loss.unwrap_or(if ds.is_classification() {
            Loss::SoftmaxXent
        } else {
            Loss::Mse
        })
    }

    fn optimizer(&self, net: &Network) -> Optimizer {
        match self.optimizer {
            OptimizerKind::Sgd => Optimizer::sgd(self.learning_rate),
            OptimizerKind::Adam => Optimizer::adam(
                net,
                AdamConfig {
                    learning_rate: self.learning_rate,
                    beta1: self.beta1,
                    beta2: self.beta2,
                    eps: self.eps,
                },
            ),
        }
    }
}

/// Accuracy for class targets, mean squared error for real targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", content = "value", rename_all = "lowercase")]
pub enum Evaluation {
    Accuracy(f64),
    Mse(f64),
}

impl Evaluation {
    pub fn value(self) -> f64 {
        match self {
            Evaluation::Accuracy(v) | Evaluation::Mse(v) => v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Evaluation::Accuracy(_) => "accuracy",
            Evaluation::Mse(_) => "mse",
        }
    }

    /// Higher accuracy or lower MSE.
    pub fn better_than(self, other: Evaluation) -> bool {
        match (self, other) {
            (Evaluation::Accuracy(a), Evaluation::Accuracy(b)) => a > b,
            (Evaluation::Mse(a), Evaluation::Mse(b)) => a < b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    /// 0 is the untrained network.
    pub epoch: usize,
    /// Mean per-sample loss over the training set after the epoch.
    pub train_loss: f64,
    pub train_metric: Evaluation,
    pub test_metric: Option<Evaluation>,
    pub seconds: f64,
    /// Fraction of spline evaluations whose input was clamped.
    pub frac_clamped: f64,
}

impl EpochMetrics {
    /// One line matching [`METRICS_HEADER`]. For regression runs the
    /// `train_acc`/`test_acc` columns carry MSE.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.epoch,
            self.train_loss,
            self.train_metric.value(),
            self.test_metric.map_or(String::new(), |m| m.value().to_string()),
            self.seconds,
            self.frac_clamped
        )
    }
}

/// Appends per-epoch lines to a CSV file.
pub struct MetricsWriter<W: Write> {
    out: W,
}

impl MetricsWriter<std::io::BufWriter<std::fs::File>> {
    pub fn create(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Self::new(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, m: &EpochMetrics) -> std::io::Result<()> {
        writeln!(self.out, "{}", m.csv_line())?;
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

fn check_dims(net: &Network, ds: &Dataset) -> Result<(), TrainError> {
    if net.input_dim() != ds.input_dim() {
        return Err(TrainError::DimMismatch {
            what: "features",
            data: ds.input_dim(),
            net: net.input_dim(),
        });
    }
    if net.output_dim() != ds.output_dim() {
        return Err(TrainError::DimMismatch {
            what: "outputs",
            data: ds.output_dim(),
            net: net.output_dim(),
        });
    }
    Ok(())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn predictions(net: &Network, ds: &Dataset) -> Result<Vec<Vec<f64>>, TrainError> {
    if ds.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    check_dims(net, ds)?;
    (0..ds.len())
        .into_par_iter()
        .map(|i| Ok(net.predict(ds.features_of(i))?))
        .collect()
}

/// Argmax accuracy for class targets, mean squared error (averaged over
/// samples and outputs) for real targets.
pub fn evaluate(net: &Network, ds: &Dataset) -> Result<Evaluation, TrainError> {
    let preds = predictions(net, ds)?;
    if ds.is_classification() {
        let correct = preds
            .iter()
            .enumerate()
            .filter(|(i, p)| matches!(ds.target_of(*i), Target::Class(c) if c == argmax(p)))
            .count();
        Ok(Evaluation::Accuracy(correct as f64 / ds.len() as f64))
    } else {
        let mut total = 0.0;
        for (i, p) in preds.iter().enumerate() {
            let Target::Values(y) = ds.target_of(i) else {
                unreachable!()
            };
            total += mse_loss(p, y, y.len())?;
        }
        Ok(Evaluation::Mse(total / ds.len() as f64))
    }
}

/// `matrix[true][predicted]` counts.
pub fn confusion_matrix(net: &Network, ds: &Dataset) -> Result<Vec<Vec<usize>>, TrainError> {
    let k = ds.output_dim();
    let preds = predictions(net, ds)?;
    let mut m = vec![vec![0; k]; k];
    for (i, p) in preds.iter().enumerate() {
        if let Target::Class(c) = ds.target_of(i) {
            m[c][argmax(p)] += 1;
        }
    }
    Ok(m)
}

/// Mean per-sample loss and clamp counts over a whole dataset.
fn dataset_loss(net: &Network, ds: &Dataset, loss: Loss) -> Result<(f64, (usize, usize)), TrainError> {
    let per_sample: Vec<(f64, (usize, usize))> = (0..ds.len())
        .into_par_iter()
        .map(|i| {
            let trace = net.forward(ds.features_of(i))?;
            let v = loss.value(&trace.output, ds.target_of(i), 1)?;
            Ok((v, trace.clamp_counts()))
        })
        .collect::<Result<_, TrainError>>()?;
    let mut total = 0.0;
    let mut clamped = (0, 0);
    for (v, (c, t)) in per_sample {
        total += v;
        clamped.0 += c;
        clamped.1 += t;
    }
    Ok((total / ds.len() as f64, clamped))
}

fn fraction(c: (usize, usize)) -> f64 {
    if c.1 == 0 {
        0.0
    } else {
        c.0 as f64 / c.1 as f64
    }
}

/// Summed tape, summed loss and clamp counts for one mini-batch.
fn batch_gradient(
    net: &Network,
    ds: &Dataset,
    batch: &[usize],
    loss: Loss,
) -> Result<(f64, GradientTape, (usize, usize)), TrainError> {
    let m = batch.len();
    let partials: Vec<(f64, GradientTape, (usize, usize))> = batch
        .par_chunks(REDUCE_CHUNK)
        .map(|chunk| {
            let mut acc: Option<(f64, GradientTape, (usize, usize))> = None;
            for &i in chunk {
                let (v, tape, trace) =
                    sample_gradient(net, ds.features_of(i), ds.target_of(i), loss, m)?;
                let (c, t) = trace.clamp_counts();
                match &mut acc {
                    None => acc = Some((v, tape, (c, t))),
                    Some((lv, lt, lc)) => {
                        *lv += v;
                        lt.accumulate(&tape);
                        lc.0 += c;
                        lc.1 += t;
                    }
                }
            }
            Ok(acc.expect("chunks are non-empty"))
        })
        .collect::<Result<_, TrainError>>()?;
    let mut iter = partials.into_iter();
    let (mut total, mut tape, mut clamped) = iter.next().expect("batch is non-empty");
    for (v, t, c) in iter {
        total += v;
        tape.accumulate(&t);
        clamped.0 += c.0;
        clamped.1 += c.1;
    }
    Ok((total, tape, clamped))
}

fn epoch_metrics(
    net: &Network,
    train: &Dataset,
    test: Option<&Dataset>,
    loss: Loss,
    epoch: usize,
    started: Instant,
    clamped: Option<(usize, usize)>,
) -> Result<EpochMetrics, TrainError> {
    let (train_loss, eval_clamped) = dataset_loss(net, train, loss)?;
    Ok(EpochMetrics {
        epoch,
        train_loss,
        train_metric: evaluate(net, train)?,
        test_metric: test.map(|t| evaluate(net, t)).transpose()?,
        seconds: started.elapsed().as_secs_f64(),
        frac_clamped: fraction(clamped.unwrap_or(eval_clamped)),
    })
}

/// Trains `net` in place, calling `on_epoch` after the initial evaluation
/// and after every epoch. Deterministic given the config seed.
pub fn train_observed(
    net: &mut Network,
    train: &Dataset,
    test: Option<&Dataset>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics) -> Result<(), TrainError>,
) -> Result<Vec<EpochMetrics>, TrainError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    check_dims(net, train)?;
    if let Some(t) = test {
        check_dims(net, t)?;
    }
    let loss = cfg.loss_for(train);
    let mut optimizer = cfg.optimizer(net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let started = Instant::now();

    let initial = epoch_metrics(net, train, test, loss, 0, started, None)?;
    if !initial.train_loss.is_finite() {
        return Err(TrainError::Diverged {
            epoch: 0,
            step: 0,
            loss: initial.train_loss,
        });
    }
    on_epoch(&initial)?;
    let mut history = vec![initial];

    let mut steps = 0usize;
    let step_limit = cfg.max_steps.unwrap_or(usize::MAX);
    for epoch in 1..=cfg.epochs {
        if steps >= step_limit {
            break;
        }
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut clamped = (0, 0);
        for batch in order.chunks(cfg.batch_size) {
            if steps >= step_limit {
                break;
            }
            let (batch_loss, tape, c) = batch_gradient(net, train, batch, loss)?;
            if !batch_loss.is_finite() || !tape.is_finite() {
                return Err(TrainError::Diverged {
                    epoch,
                    step: steps,
                    loss: batch_loss,
                });
            }
            clamped.0 += c.0;
            clamped.1 += c.1;
            optimizer.step(net, &tape);
            steps += 1;
        }
        let m = epoch_metrics(net, train, test, loss, epoch, started, Some(clamped))?;
        if !m.train_loss.is_finite() {
            return Err(TrainError::Diverged {
                epoch,
                step: steps,
                loss: m.train_loss,
            });
        }
        log::debug!("epoch {epoch}: {}", m.csv_line());
        on_epoch(&m)?;
        history.push(m);
    }
    Ok(history)
}

pub fn train(
    net: &mut Network,
    train: &Dataset,
    test: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<Vec<EpochMetrics>, TrainError> {
    train_observed(net, train, test, cfg, |_| Ok(()))
}

/// Hyperparameter grid for spline families.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub learning_rates: Vec<f64>,
    pub num_basis: Vec<usize>,
    pub degrees: Vec<usize>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            learning_rates: vec![1e-2, 3e-3, 1e-3],
            num_basis: vec![5, 8, 16],
            degrees: vec![2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub learning_rate: f64,
    pub num_basis: usize,
    pub degree: usize,
    pub validation: Evaluation,
}

/// Trains one model per grid point (architecture from `arch_for(num_basis,
/// degree)`) and scores it on `validation`. Results come back in grid order.
pub fn grid_search(
    arch_for: impl Fn(usize, usize) -> ArchSpec,
    train_set: &Dataset,
    validation: &Dataset,
    base: &TrainConfig,
    grid: &SearchGrid,
) -> Result<Vec<GridPoint>, TrainError> {
    let mut out = Vec::new();
    for &degree in &grid.degrees {
        for &num_basis in &grid.num_basis {
            if num_basis < degree + 1 {
                continue;
            }
            for &learning_rate in &grid.learning_rates {
                let cfg = TrainConfig {
                    learning_rate,
                    ..base.clone()
                };
                let mut net = init_network(&arch_for(num_basis, degree), base.seed)?;
                train(&mut net, train_set, None, &cfg)?;
                out.push(GridPoint {
                    learning_rate,
                    num_basis,
                    degree,
                    validation: evaluate(&net, validation)?,
                });
            }
        }
    }
    Ok(out)
}

/// Best point of a finished grid search.
pub fn best_point(points: &[GridPoint]) -> Option<&GridPoint> {
    points.iter().fold(None, |best: Option<&GridPoint>, p| match best {
        Some(b) if !p.validation.better_than(b.validation) => Some(b),
        _ => Some(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_symbolic, SymbolicFn, SymbolicTask, Targets};
    use crate::dense::Matrix;
    use crate::network::{Activation, LayerSpec, OutputLayer};

    fn fixed_output_net(weights: Vec<f64>, bias: Vec<f64>, d: usize, o: usize) -> Network {
        Network {
            hidden: vec![],
            output: OutputLayer {
                weights: Matrix::new(o, d, weights).unwrap(),
                bias,
            },
        }
    }

    fn classes(features: Vec<f64>, labels: Vec<usize>, k: usize) -> Dataset {
        let n = labels.len();
        let d = features.len() / n;
        Dataset::new(
            Matrix::new(n, d, features).unwrap(),
            Targets::Classes {
                labels,
                num_classes: k,
                names: (0..k).map(|c| c.to_string()).collect(),
            },
            (0..d).map(|c| format!("x{c}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_and_constant_predictors() {
        // ŷ = x for two one-hot features
        let ds = classes(vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 0, 1], 2);
        let perfect = fixed_output_net(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2);
        assert_eq!(evaluate(&perfect, &ds).unwrap(), Evaluation::Accuracy(1.0));
        let constant = fixed_output_net(vec![0.0; 4], vec![1.0, 0.0], 2, 2);
        assert_eq!(evaluate(&constant, &ds).unwrap(), Evaluation::Accuracy(0.5));
    }

    #[test]
    fn confusion_on_ten_samples() {
        // predictor: class = argmax(x0, x1, x2); labels disagree on three rows
        let feats = vec![
            1.0, 0.0, 0.0, // 0 -> 0
            0.0, 1.0, 0.0, // 1 -> 1
            0.0, 0.0, 1.0, // 2 -> 2
            1.0, 0.0, 0.0, // 1 -> 0 wrong
            0.0, 1.0, 0.0, // 1 -> 1
            0.0, 0.0, 1.0, // 0 -> 2 wrong
            1.0, 0.0, 0.0, // 0 -> 0
            0.0, 1.0, 0.0, // 2 -> 1 wrong
            0.0, 0.0, 1.0, // 2 -> 2
            1.0, 0.0, 0.0, // 0 -> 0
        ];
        let labels = vec![0, 1, 2, 1, 1, 0, 0, 2, 2, 0];
        let ds = classes(feats, labels, 3);
        let net = fixed_output_net(Matrix::identity(3).into_data(), vec![0.0; 3], 3, 3);
        let m = confusion_matrix(&net, &ds).unwrap();
        assert_eq!(m, vec![vec![3, 0, 1], vec![1, 2, 0], vec![0, 1, 2]]);
        assert_eq!(evaluate(&net, &ds).unwrap(), Evaluation::Accuracy(0.7));
    }

    #[test]
    fn empty_and_mismatched_datasets() {
        let ds = classes(vec![1.0, 0.0], vec![0], 2);
        let wrong = fixed_output_net(vec![0.0; 3], vec![0.0], 3, 1);
        assert!(matches!(evaluate(&wrong, &ds), Err(TrainError::DimMismatch { .. })));
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F2, 64), 1).unwrap();
        let arch = ArchSpec::new(2, vec![LayerSpec::lcn(4, 8, 3)], 1);
        let mut net = init_network(&arch, 2).unwrap();
        let before = net.clone();
        let cfg = TrainConfig {
            epochs: 3,
            learning_rate: 0.0,
            batch_size: 16,
            ..Default::default()
        };
        let hist = train(&mut net, &ds, None, &cfg).unwrap();
        assert_eq!(net, before);
        assert!(hist.windows(2).all(|w| w[0].train_loss == w[1].train_loss));
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F3, 200), 4).unwrap();
        let arch = ArchSpec::new(
            2,
            vec![LayerSpec::lcn(6, 8, 3), LayerSpec::mlp(4, Activation::Tanh)],
            1,
        );
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 10,
            learning_rate: 1e-2,
            seed: 9,
            ..Default::default()
        };
        let mut a = init_network(&arch, 5).unwrap();
        let mut b = init_network(&arch, 5).unwrap();
        let ha = train(&mut a, &ds, Some(&ds), &cfg).unwrap();
        let hb = train(&mut b, &ds, Some(&ds), &cfg).unwrap();
        assert_eq!(a, b);
        let strip = |h: &[EpochMetrics]| h.iter().map(|m| (m.train_loss, m.test_metric)).collect::<Vec<_>>();
        assert_eq!(strip(&ha), strip(&hb));
        assert!(ha.last().unwrap().train_loss < ha[0].train_loss);
        assert_eq!(ha.len(), 6);
        assert_eq!(a.num_params(), init_network(&arch, 0).unwrap().num_params());
    }

    #[test]
    fn max_steps_stops_mid_epoch() {
        let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F1, 100), 1).unwrap();
        let arch = ArchSpec::new(1, vec![LayerSpec::lcn(2, 8, 3)], 1);
        let cfg = TrainConfig {
            epochs: 100,
            batch_size: 10,
            max_steps: Some(25),
            ..Default::default()
        };
        let mut net = init_network(&arch, 0).unwrap();
        let hist = train(&mut net, &ds, None, &cfg).unwrap();
        // 10 steps per epoch: epochs 1, 2 full, 3 partial
        assert_eq!(hist.len(), 4);
    }

    #[test]
    fn divergence_is_reported() {
        let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F2, 32), 1).unwrap();
        let arch = ArchSpec::new(2, vec![LayerSpec::mlp(4, Activation::Relu)], 1);
        let mut net = init_network(&arch, 0).unwrap();
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 1e200,
            epochs: 5,
            ..Default::default()
        };
        assert!(matches!(
            train(&mut net, &ds, None, &cfg),
            Err(TrainError::Diverged { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { learning_rate: -1.0, ..Default::default() },
            TrainConfig { beta1: 1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn metrics_csv_layout() {
        let m = EpochMetrics {
            epoch: 2,
            train_loss: 0.5,
            train_metric: Evaluation::Accuracy(0.75),
            test_metric: Some(Evaluation::Accuracy(0.5)),
            seconds: 1.25,
            frac_clamped: 0.0,
        };
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        w.write(&m).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text, format!("{METRICS_HEADER}\n2,0.5,0.75,0.5,1.25,0\n"));
    }

    #[test]
    fn tiny_grid_search() {
        let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F1, 40), 2).unwrap();
        let grid = SearchGrid {
            learning_rates: vec![1e-2, 1e-3],
            num_basis: vec![3, 6],
            degrees: vec![3],
        };
        let cfg = TrainConfig { epochs: 1, batch_size: 8, ..Default::default() };
        let points = grid_search(
            |n, p| ArchSpec::new(1, vec![LayerSpec::lcn(2, n, p)], 1),
            &ds,
            &ds,
            &cfg,
            &grid,
        )
        .unwrap();
        // N = 3 cannot carry degree 3
        assert_eq!(points.len(), 2);
        assert!(best_point(&points).is_some());
        assert_eq!(SearchGrid::default().learning_rates, vec![1e-2, 3e-3, 1e-3]);
    }
}
