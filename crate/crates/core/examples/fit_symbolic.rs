//! Fits one of the built-in symbolic functions with an LCN and with an MLP of
//! the same parameter count.
//!
//! `cargo run --release --example fit_symbolic -- f4`

use lcn::analysis::{match_params, BudgetOptions, Family};
use lcn::data::{gen_symbolic, split, SymbolicFn, SymbolicTask};
use lcn::training::train;
use lcn::{evaluate, init_network, ArchSpec, LayerSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task: SymbolicFn = std::env::args().nth(1).as_deref().unwrap_or("f1").parse()?;
    let ds = gen_symbolic(&SymbolicTask::new(task, 2000), 0)?;
    let (train_set, test_set) = split(&ds, 0.8, 0)?;
    let d = task.input_dim();

    let lcn = ArchSpec::new(d, vec![LayerSpec::lcn(8, 16, 3)], 1);
    let budget = lcn::analysis::cost_report(&lcn).params;
    let mlp = match_params(Family::Mlp, d, 1, budget, &BudgetOptions::default())?.arch;

    let cfg = TrainConfig {
        epochs: 40,
        batch_size: 16,
        learning_rate: 3e-3,
        max_steps: Some(5000),
        ..TrainConfig::default()
    };
    for (name, arch) in [("lcn", lcn), ("mlp", mlp)] {
        let mut net = init_network(&arch, 0)?;
        let history = train(&mut net, &train_set, Some(&test_set), &cfg)?;
        let last = history.last().expect("at least the initial epoch");
        println!(
            "{} {name}: {} params, train loss {:.3e} -> {:.3e}, test mse {:.3e}",
            task.id(),
            net.num_params(),
            history[0].train_loss,
            last.train_loss,
            evaluate(&net, &test_set)?.value()
        );
    }
    Ok(())
}
