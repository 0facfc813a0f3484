//! Grid search over learning rate, basis count and degree for an LCN.
//!
//! `cargo run --release --example grid_search`

use lcn::data::{gen_symbolic, split, SymbolicFn, SymbolicTask};
use lcn::training::{best_point, grid_search, SearchGrid};
use lcn::{ArchSpec, LayerSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F3, 1000), 0)?;
    let (train_set, validation) = split(&ds, 0.8, 0)?;
    let base = TrainConfig {
        epochs: 15,
        batch_size: 16,
        ..TrainConfig::default()
    };
    let points = grid_search(
        |n, p| ArchSpec::new(2, vec![LayerSpec::lcn(6, n, p)], 1),
        &train_set,
        &validation,
        &base,
        &SearchGrid::default(),
    )?;
    for p in &points {
        println!("lr {:<6} N {:>2} p {}: {:?}", p.learning_rate, p.num_basis, p.degree, p.validation);
    }
    if let Some(best) = best_point(&points) {
        println!("best: lr {} N {} p {}", best.learning_rate, best.num_basis, best.degree);
    }
    Ok(())
}
