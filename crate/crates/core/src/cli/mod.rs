//! The `lcn` command line: `train`, `eval`, `gradcheck`, `sweep`, `gen-data`.
//!
//! Exit codes: 0 success, 1 validation failure (bad config, failed gradient
//! check), 2 runtime failure.

pub mod config;

pub use config::{ConfigError, DataKind, Overrides, RunConfig};

use crate::analysis::{cost_report, run_sweep, Family, SweepConfig};
use crate::backprop::gradient_check;
use crate::data::{gen_symbolic, SymbolicFn, SymbolicTask, Targets};
use crate::network::{init_network, load_network, save_network, ArchSpec};
use crate::training::{evaluate, train_observed, Loss, MetricsWriter, OptimizerKind, Target};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CHECKPOINT_FILE: &str = "checkpoint.lcn";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
/// Gradient checks above this maximum relative error fail.
pub const GRADCHECK_TOLERANCE: f64 = 1e-5;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lcn", version, about = "Local Control Networks: train, evaluate, gradient-check and sweep")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model; writes checkpoint.lcn, metrics.csv and summary.json.
    Train(Common),
    /// Evaluate a checkpoint on the configured test split; prints one JSON record.
    Eval(Common),
    /// Compare backprop against finite differences on a small random network.
    Gradcheck(Common),
    /// Parameter-matched sweep over families, budgets and seeds.
    Sweep(Common),
    /// Write a symbolic-regression dataset as CSV plus its schema.
    GenData(GenData),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// mlp, lcn or kan.
    #[arg(long)]
    pub family: Option<Family>,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long = "num-basis")]
    pub num_basis: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// sgd or adam.
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<usize>,
    /// Symbolic task id (f1..f5); selects symbolic data.
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenData {
    /// Symbolic task id, f1 to f5.
    #[arg(long)]
    pub task: String,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; the schema goes next to it as `<stem>.schema.toml`.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    match s {
        "sgd" => Ok(OptimizerKind::Sgd),
        "adam" => Ok(OptimizerKind::Adam),
        other => Err(format!("unknown optimizer '{other}' (sgd or adam)")),
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out_dir: self.out.clone(),
            family: self.family,
            widths: self.widths.clone(),
            num_basis: self.num_basis,
            degree: self.degree,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            optimizer: self.optimizer,
            max_steps: self.max_steps,
            task: self.task.clone(),
            samples: self.samples,
            checkpoint: self.checkpoint.clone(),
        }
    }

    /// File values, then flag overrides, then validation.
    pub fn resolve(&self, needs_data: bool) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p).map_err(Failure::validation)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate(needs_data).map_err(Failure::validation)?;
        Ok(cfg)
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::runtime(format!("{}: {e}", path.display()))
}

fn finish_partial(partial: &Path, final_path: &Path) -> Result<(), Failure> {
    std::fs::rename(partial, final_path).map_err(io_err(final_path))
}

/// Trains per the config. Outputs are written as `*.partial` and renamed once
/// training finishes, so a crashed run leaves only clearly marked files.
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let (train_set, test_set) = cfg.load_data().map_err(Failure::validation)?;
    let arch = cfg.model.arch(train_set.input_dim(), train_set.output_dim());
    arch.validate().map_err(Failure::validation)?;
    let mut net = init_network(&arch, cfg.seed).map_err(Failure::validation)?;
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let metrics_path = dir.join(METRICS_FILE);
    let metrics_partial = dir.join(format!("{METRICS_FILE}.partial"));
    let mut writer = MetricsWriter::create(&metrics_partial).map_err(io_err(&metrics_partial))?;
    let tc = cfg.train_config();
    let history = train_observed(&mut net, &train_set, Some(&test_set), &tc, |m| {
        log::info!("{}", m.csv_line());
        Ok(writer.write(m)?)
    })
    .map_err(Failure::runtime)?;
    drop(writer);

    let cp_path = dir.join(CHECKPOINT_FILE);
    let cp_partial = dir.join(format!("{CHECKPOINT_FILE}.partial"));
    save_network(&cp_partial, &net).map_err(Failure::runtime)?;
    finish_partial(&cp_partial, &cp_path)?;
    finish_partial(&metrics_partial, &metrics_path)?;

    let last = history.last().expect("initial evaluation is always recorded");
    let cost = cost_report(&arch);
    let test = last.test_metric.expect("test set supplied");
    let summary = json!({
        "family": cfg.model.family.name(),
        "params": cost.params,
        "flops": cost.flops,
        "epochs": last.epoch,
        "train_loss": last.train_loss,
        "metric": test.name(),
        "test": test.value(),
        "seconds": last.seconds,
        "checkpoint": cp_path,
    });
    let summary_path = dir.join(SUMMARY_FILE);
    std::fs::write(&summary_path, format!("{summary:#}\n")).map_err(io_err(&summary_path))?;
    writeln!(out, "{summary}").map_err(Failure::runtime)
}

/// Prints `{"checkpoint", "metric", "value", "samples"}` for the test split.
pub fn cmd_eval(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let cp = cfg
        .model
        .checkpoint
        .as_ref()
        .map(|p| p.get_ref().clone())
        .unwrap_or_else(|| cfg.out_dir.join(CHECKPOINT_FILE));
    let net = load_network(&cp).map_err(Failure::validation)?;
    let (_, test_set) = cfg.load_data().map_err(Failure::validation)?;
    let result = evaluate(&net, &test_set).map_err(Failure::validation)?;
    let record = json!({
        "checkpoint": cp,
        "metric": result.name(),
        "value": result.value(),
        "samples": test_set.len(),
    });
    writeln!(out, "{record}").map_err(Failure::runtime)
}

/// The network checked when no model is configured: D=3, widths 5 and 4, O=2.
pub fn default_gradcheck_arch(cfg: &RunConfig) -> ArchSpec {
    let mut model = cfg.model.clone();
    if cfg.source.is_none() && model == config::ModelConfig::default() {
        model.widths = vec![5, 4];
    }
    model.arch(3, 2)
}

/// Checks a few random inputs on the configured architecture; fails above
/// [`GRADCHECK_TOLERANCE`].
pub fn cmd_gradcheck(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Failure> {
    const SAMPLES: usize = 5;
    let arch = default_gradcheck_arch(cfg);
    arch.validate().map_err(Failure::validation)?;
    let net = init_network(&arch, cfg.seed).map_err(Failure::validation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..SAMPLES {
        let x: Vec<f64> = (0..arch.input_dim).map(|_| rng.random_range(0.05..0.95)).collect();
        let class = rng.random_range(0..arch.output_dim);
        let check = gradient_check(&net, &x, Target::Class(class), Loss::SoftmaxXent, 1e-6)
            .map_err(Failure::runtime)?;
        worst = worst.max(check.max_rel_error);
        compared += check.compared;
    }
    let pass = worst <= GRADCHECK_TOLERANCE;
    let record = json!({
        "params": cost_report(&arch).params,
        "compared": compared,
        "max_rel_error": worst,
        "tolerance": GRADCHECK_TOLERANCE,
        "pass": pass,
    });
    writeln!(out, "{record}").map_err(Failure::runtime)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "max relative error {worst:e} exceeds {GRADCHECK_TOLERANCE:e}"
        )))
    }
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), Failure> {
    if cfg.sweep.budgets.is_empty() {
        return Err(Failure::validation("`sweep.budgets`: at least one budget is required"));
    }
    let (train_set, test_set) = cfg.load_data().map_err(Failure::validation)?;
    let sweep = SweepConfig {
        families: cfg.sweep.families.clone(),
        budgets: cfg.sweep.budgets.clone(),
        seeds: cfg.sweep.seeds.clone(),
        train: cfg.train_config(),
        builder: cfg.sweep.builder.clone(),
        threads: cfg.sweep.threads,
    };
    let result = run_sweep(&sweep, &train_set, &test_set, &cfg.out_dir).map_err(Failure::runtime)?;
    for u in &result.unreachable {
        writeln!(out, "{}", json!({"budget": u.budget, "unreachable": u.reason})).map_err(Failure::runtime)?;
    }
    let summary = json!({
        "completed": result.completed,
        "skipped": result.skipped,
        "unreachable": result.unreachable.len(),
        "records": result.records.len(),
        "results": cfg.out_dir.join(crate::analysis::sweep::RESULTS_FILE),
    });
    writeln!(out, "{summary}").map_err(Failure::runtime)
}

/// Writes `x1..xD,y` rows (features already in `[0, 1]`) and a regression schema.
pub fn cmd_gen_data(args: &GenData, out: &mut dyn Write) -> Result<(), Failure> {
    let function: SymbolicFn = args.task.parse().map_err(Failure::validation)?;
    let task = SymbolicTask {
        function,
        samples: args.samples,
        noise: args.noise,
    };
    let ds = gen_symbolic(&task, args.seed).map_err(Failure::validation)?;
    let Targets::Values(y) = &ds.targets else {
        unreachable!("symbolic tasks are regression")
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut w = csv::Writer::from_path(&args.out).map_err(Failure::runtime)?;
    let mut header = ds.feature_names.clone();
    header.push("y".into());
    w.write_record(&header).map_err(Failure::runtime)?;
    for i in 0..ds.len() {
        let mut row: Vec<String> = ds.features_of(i).iter().map(f64::to_string).collect();
        row.push(y.get(i, 0).to_string());
        w.write_record(&row).map_err(Failure::runtime)?;
    }
    w.flush().map_err(io_err(&args.out))?;
    let schema = args.out.with_extension("schema.toml");
    std::fs::write(&schema, "task = \"regression\"\n\n[columns]\ny = \"target\"\n").map_err(io_err(&schema))?;
    writeln!(
        out,
        "{}",
        json!({"task": function.id(), "samples": ds.len(), "csv": args.out, "schema": schema})
    )
    .map_err(Failure::runtime)
}

/// Parses `args` and runs the command, writing records to `out` and
/// diagnostics to stderr. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Train(c) => c.resolve(true).and_then(|cfg| cmd_train(&cfg, out)),
        Command::Eval(c) => c.resolve(true).and_then(|cfg| cmd_eval(&cfg, out)),
        Command::Gradcheck(c) => c.resolve(false).and_then(|cfg| cmd_gradcheck(&cfg, out)),
        Command::Sweep(c) => c.resolve(true).and_then(|cfg| cmd_sweep(&cfg, out)),
        Command::GenData(g) => cmd_gen_data(g, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run(std::iter::once("lcn").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn gradcheck_default_net_passes() {
        let (code, out) = run_capture(&["gradcheck"]);
        assert_eq!(code, EXIT_OK, "{out}");
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!(v["max_rel_error"].as_f64().unwrap() <= GRADCHECK_TOLERANCE);
        assert_eq!(v["pass"], true);
    }

    #[test]
    fn missing_dataset_is_a_validation_failure() {
        let (code, _) = run_capture(&["train"]);
        assert_eq!(code, EXIT_VALIDATION);
        let (code, _) = run_capture(&["train", "--task", "f9"]);
        assert_eq!(code, EXIT_VALIDATION);
    }

    #[test]
    fn unknown_flag_is_a_validation_failure() {
        let (code, _) = run_capture(&["train", "--learning-rte", "1"]);
        assert_eq!(code, EXIT_VALIDATION);
    }
}
