//! Trains an LCN with under 30k parameters on the bundled 10,000-digit MNIST
//! subset and writes per-epoch metrics to `mnist_metrics.csv`.
//!
//! `cargo run --release --example mnist_subset -- [epochs] [images.idx labels.idx]`

use lcn::data::{load_idx, split};
use lcn::training::{train_observed, MetricsWriter};
use lcn::{init_network, ArchSpec, LayerSpec, TrainConfig};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-10k");
    let images = args.next().map(PathBuf::from).unwrap_or(dir.join("images-idx3-ubyte.gz"));
    let labels = args.next().map(PathBuf::from).unwrap_or(dir.join("labels-idx1-ubyte.gz"));

    let ds = load_idx(&images, &labels)?;
    let (train_set, test_set) = split(&ds, 0.8, 0)?;
    println!("{} train / {} test images", train_set.len(), test_set.len());

    let arch = ArchSpec::new(784, vec![LayerSpec::lcn(35, 13, 3)], 10);
    let mut net = init_network(&arch, 0)?;
    println!("{} parameters", net.num_params());
    let cfg = TrainConfig {
        epochs,
        batch_size: 32,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let mut metrics = MetricsWriter::create("mnist_metrics.csv")?;
    train_observed(&mut net, &train_set, Some(&test_set), &cfg, |m| {
        println!(
            "epoch {}: loss {:.4}, test accuracy {:.4}, {:.1}s",
            m.epoch,
            m.train_loss,
            m.test_metric.map_or(f64::NAN, |t| t.value()),
            m.seconds
        );
        Ok(metrics.write(m)?)
    })?;
    Ok(())
}
