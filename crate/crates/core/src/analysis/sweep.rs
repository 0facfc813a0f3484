//! Matched-budget sweeps over model families, budgets and seeds.
//!
//! Results are appended to `sweep.csv` in the output directory, one line per
//! finished run (`family,params,flops,seed,test_acc,wall_seconds`). Rerunning
//! a sweep skips every `(family, params, seed)` already on file. After each
//! sweep `sweep_plot.csv` is rewritten with per-configuration aggregates.
//! For regression data the `test_acc` column holds test MSE.

use super::budget::{matched_configs, BudgetOptions, Family};
use super::cost::cost_report;
use crate::data::Dataset;
use crate::network::{init_network, NetworkError};
use crate::training::{evaluate, train, TrainConfig, TrainError};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

pub const SWEEP_HEADER: &str = "family,params,flops,seed,test_acc,wall_seconds";
pub const PLOT_HEADER: &str = "family,params,flops,runs,mean_test_acc,min_test_acc,max_test_acc";
pub const RESULTS_FILE: &str = "sweep.csv";
pub const PLOT_FILE: &str = "sweep_plot.csv";
/// Caps the number of runs trained concurrently.
pub const THREADS_ENV: &str = "LCN_SWEEP_THREADS";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    pub budgets: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Shared training settings; the seed is replaced per run.
    pub train: TrainConfig,
    pub builder: BudgetOptions,
    /// Concurrent runs; `None` uses every core. [`THREADS_ENV`] caps it further.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub family: Family,
    pub params: usize,
    pub flops: usize,
    pub seed: u64,
    pub test_acc: f64,
    pub wall_seconds: f64,
}

impl SweepRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.family, self.params, self.flops, self.seed, self.test_acc, self.wall_seconds
        )
    }

    pub fn parse(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return None;
        }
        Some(Self {
            family: f[0].parse().ok()?,
            params: f[1].parse().ok()?,
            flops: f[2].parse().ok()?,
            seed: f[3].parse().ok()?,
            test_acc: f[4].parse().ok()?,
            wall_seconds: f[5].parse().ok()?,
        })
    }

    fn key(&self) -> (Family, usize, u64) {
        (self.family, self.params, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnreachableBudget {
    pub budget: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Every record on file after the sweep, sorted by family, params, seed.
    pub records: Vec<SweepRecord>,
    /// Runs trained by this invocation.
    pub completed: usize,
    /// Runs skipped because they were already on file.
    pub skipped: usize,
    pub unreachable: Vec<UnreachableBudget>,
}

/// Records in a results file. Lines that do not parse (a header, or a line cut
/// short by an interrupted run) are ignored.
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>, SweepError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let io = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        if let Some(r) = SweepRecord::parse(&line.map_err(io)?) {
            out.push(r);
        }
    }
    Ok(out)
}

fn open_results(path: &Path) -> Result<File, SweepError> {
    let io = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    let existing = if path.exists() {
        std::fs::read(path).map_err(io)?
    } else {
        Vec::new()
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io)?;
    if existing.is_empty() {
        writeln!(file, "{SWEEP_HEADER}").map_err(io)?;
    } else if !existing.ends_with(b"\n") {
        writeln!(file).map_err(io)?;
    }
    Ok(file)
}

/// Per-configuration mean/min/max over seeds.
pub fn write_plot_csv(records: &[SweepRecord], path: &Path) -> Result<(), SweepError> {
    let mut groups: BTreeMap<(Family, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.family, r.params, r.flops))
            .or_default()
            .push(r.test_acc);
    }
    let mut text = format!("{PLOT_HEADER}\n");
    for ((family, params, flops), accs) in groups {
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        let min = accs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = accs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        text.push_str(&format!(
            "{family},{params},{flops},{},{mean},{min},{max}\n",
            accs.len()
        ));
    }
    std::fs::write(path, text).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn thread_count(requested: Option<usize>) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = requested.unwrap_or(cores);
    cap.map_or(n, |c| n.min(c)).max(1)
}

struct Job {
    family: Family,
    arch: crate::network::ArchSpec,
    params: usize,
    flops: usize,
    seed: u64,
}

/// Trains every reachable `(family, budget, seed)` combination not already
/// recorded in `out_dir`.
pub fn run_sweep(
    cfg: &SweepConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    out_dir: &Path,
) -> Result<SweepResult, SweepError> {
    if cfg.families.is_empty() || cfg.budgets.is_empty() || cfg.seeds.is_empty() {
        return Err(SweepError::Config(
            "families, budgets and seeds must all be non-empty".into(),
        ));
    }
    cfg.train.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| SweepError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let results_path = out_dir.join(RESULTS_FILE);
    let done: HashSet<(Family, usize, u64)> =
        read_records(&results_path)?.iter().map(SweepRecord::key).collect();

    let mut result = SweepResult::default();
    let mut jobs = Vec::new();
    let mut planned = HashSet::new();
    for &budget in &cfg.budgets {
        let picks = match matched_configs(
            &cfg.families,
            train_set.input_dim(),
            train_set.output_dim(),
            budget,
            &cfg.builder,
        ) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("skipping budget {budget}: {e}");
                result.unreachable.push(UnreachableBudget {
                    budget,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for pick in picks {
            let flops = cost_report(&pick.arch).flops;
            for &seed in &cfg.seeds {
                let key = (pick.family, pick.params, seed);
                if done.contains(&key) {
                    result.skipped += 1;
                } else if planned.insert(key) {
                    jobs.push(Job {
                        family: pick.family,
                        arch: pick.arch.clone(),
                        params: pick.params,
                        flops,
                        seed,
                    });
                }
            }
        }
    }

    let writer = Mutex::new(open_results(&results_path)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(cfg.threads))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let outcomes: Vec<Result<(), SweepError>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let started = Instant::now();
                let mut net = init_network(&job.arch, job.seed)?;
                let train_cfg = TrainConfig {
                    seed: job.seed,
                    ..cfg.train.clone()
                };
                train(&mut net, train_set, None, &train_cfg)?;
                let record = SweepRecord {
                    family: job.family,
                    params: job.params,
                    flops: job.flops,
                    seed: job.seed,
                    test_acc: evaluate(&net, test_set)?.value(),
                    wall_seconds: started.elapsed().as_secs_f64(),
                };
                log::info!("sweep run done: {}", record.csv_line());
                let mut file = writer.lock().expect("writer lock");
                writeln!(file, "{}", record.csv_line())
                    .and_then(|_| file.flush())
                    .map_err(|source| SweepError::Io {
                        path: results_path.clone(),
                        source,
                    })
            })
            .collect()
    });
    for o in outcomes {
        o?;
    }
    result.completed = jobs.len();

    let mut records = read_records(&results_path)?;
    records.sort_by(|a, b| a.key().cmp(&b.key()));
    write_plot_csv(&records, &out_dir.join(PLOT_FILE))?;
    result.records = records;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_line_round_trip() {
        let r = SweepRecord {
            family: Family::Kan,
            params: 1234,
            flops: 99_000,
            seed: 7,
            test_acc: 0.875,
            wall_seconds: 1.5,
        };
        assert_eq!(r.csv_line(), "kan,1234,99000,7,0.875,1.5");
        assert_eq!(SweepRecord::parse(&r.csv_line()), Some(r));
        assert_eq!(SweepRecord::parse(SWEEP_HEADER), None);
        assert_eq!(SweepRecord::parse("lcn,12,3"), None);
    }

    #[test]
    fn plot_aggregates_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let rec = |seed, acc| SweepRecord {
            family: Family::Lcn,
            params: 10,
            flops: 20,
            seed,
            test_acc: acc,
            wall_seconds: 0.0,
        };
        let path = dir.path().join("plot.csv");
        write_plot_csv(&[rec(0, 0.5), rec(1, 0.75)], &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, format!("{PLOT_HEADER}\nlcn,10,20,2,0.625,0.5,0.75\n"));
    }

    #[test]
    fn truncated_line_is_repaired_before_appending() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(RESULTS_FILE);
        std::fs::write(&path, format!("{SWEEP_HEADER}\nmlp,10,20,0,0.5,1.0\nlcn,1")).unwrap();
        let mut f = open_results(&path).unwrap();
        writeln!(f, "kan,30,40,1,0.25,2").unwrap();
        drop(f);
        let recs = read_records(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].family, Family::Kan);
    }
}
