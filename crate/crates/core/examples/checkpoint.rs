//! Trains briefly, saves a checkpoint, reloads it and confirms the reloaded
//! network predicts bit-identically.
//!
//! `cargo run --example checkpoint`

use lcn::data::{gen_symbolic, SymbolicFn, SymbolicTask};
use lcn::network::{load_network, save_network};
use lcn::training::train;
use lcn::{init_network, ArchSpec, LayerSpec, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = gen_symbolic(&SymbolicTask::new(SymbolicFn::F2, 500), 3)?;
    let arch = ArchSpec::new(2, vec![LayerSpec::lcn(6, 8, 3), LayerSpec::kan(3, 5, 2)], 1);
    let mut net = init_network(&arch, 3)?;
    train(&mut net, &ds, None, &TrainConfig { epochs: 5, ..TrainConfig::default() })?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.lcn");
    save_network(&path, &net)?;
    let loaded = load_network(&path)?;
    println!("{} bytes on disk", std::fs::metadata(&path)?.len());

    let same = (0..ds.len()).all(|i| {
        let x = ds.features_of(i);
        net.predict(x).ok() == loaded.predict(x).ok()
    });
    println!("reloaded predictions identical on {} samples: {same}", ds.len());
    Ok(())
}
