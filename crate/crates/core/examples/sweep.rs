//! A small parameter-matched sweep on a symbolic task. Results accumulate in
//! `sweep_out/sweep.csv`; rerunning skips finished runs.
//!
//! `LCN_SWEEP_THREADS=4 cargo run --release --example sweep`

use lcn::analysis::{run_sweep, BudgetOptions, Family, SweepConfig};
use lcn::data::{gen_symbolic, split, SymbolicFn, SymbolicTask};
use lcn::TrainConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F3, 1500), 0)?;
    let (train_set, test_set) = split(&ds, 0.8, 0)?;
    let cfg = SweepConfig {
        families: Family::ALL.to_vec(),
        budgets: vec![100, 200, 400],
        seeds: vec![0, 1],
        train: TrainConfig {
            epochs: 20,
            batch_size: 16,
            learning_rate: 3e-3,
            ..TrainConfig::default()
        },
        builder: BudgetOptions::default(),
        threads: None,
    };
    let result = run_sweep(&cfg, &train_set, &test_set, "sweep_out".as_ref())?;
    println!("trained {}, skipped {}", result.completed, result.skipped);
    for u in &result.unreachable {
        println!("budget {} unreachable: {}", u.budget, u.reason);
    }
    println!("{:<4} {:>7} {:>7} {:>4} {:>10}", "fam", "params", "flops", "seed", "test mse");
    for r in &result.records {
        println!("{:<4} {:>7} {:>7} {:>4} {:>10.3e}", r.family, r.params, r.flops, r.seed, r.test_acc);
    }
    Ok(())
}
