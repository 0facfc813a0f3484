//! Loads a CSV with a schema, one-hot encodes categorical columns, scales
//! features to [0, 1], trains an LCN classifier and prints a confusion matrix.
//!
//! `cargo run --example tabular_csv -- data.csv data.schema.toml`
//! (defaults to the small fixture shipped with the tests)

use lcn::data::{load_csv, minmax_normalize, split};
use lcn::training::{confusion_matrix, train};
use lcn::{evaluate, init_network, ArchSpec, LayerSpec, Targets, TrainConfig};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut args = std::env::args().skip(1);
    let csv = args.next().map(PathBuf::from).unwrap_or(fixtures.join("bank_tiny.csv"));
    let schema = args.next().map(PathBuf::from).unwrap_or(fixtures.join("bank_tiny.schema.toml"));

    let ds = minmax_normalize(&load_csv(&csv, &schema)?);
    println!("{} rows, features {:?}", ds.len(), ds.feature_names);
    let (train_set, test_set) = split(&ds, 0.8, 0)?;

    let arch = ArchSpec::new(ds.input_dim(), vec![LayerSpec::lcn(6, 6, 3)], ds.output_dim());
    let mut net = init_network(&arch, 0)?;
    let cfg = TrainConfig {
        epochs: 60,
        batch_size: 8,
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    train(&mut net, &train_set, None, &cfg)?;
    println!("test {:?}", evaluate(&net, &test_set)?);

    if let Targets::Classes { names, .. } = &ds.targets {
        println!("confusion (rows true, columns predicted), classes {names:?}");
        for row in confusion_matrix(&net, &test_set)? {
            println!("  {row:?}");
        }
    }
    Ok(())
}
