//! Parameter and FLOP counts per layer, and parameter-matched configurations
//! of the three families.
//!
//! `cargo run --example cost_accounting -- 20000`

use lcn::analysis::{cost_report, matched_configs, param_spread, BudgetOptions, Family};
use lcn::{Activation, ArchSpec, LayerSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20_000);

    let arch = ArchSpec::new(
        784,
        vec![LayerSpec::lcn(32, 8, 3), LayerSpec::mlp(16, Activation::Relu), LayerSpec::kan(8, 6, 3)],
        10,
    );
    let report = cost_report(&arch);
    println!("{:<28} {:>8} {:>10}", "layer", "params", "flops");
    for l in &report.layers {
        println!("{:<28} {:>8} {:>10}", l.name, l.params, l.flops);
    }
    println!("{:<28} {:>8} {:>10}", "total", report.params, report.flops);

    println!("\nmatched configurations for {budget} parameters, 784 -> 10");
    let picks = matched_configs(&Family::ALL, 784, 10, budget, &BudgetOptions::default())?;
    for c in &picks {
        let r = cost_report(&c.arch);
        println!("{:<4} {:<18} {:>6} params {:>7} flops", c.family, r.layers[0].name, r.params, r.flops);
    }
    let counts: Vec<usize> = picks.iter().map(|c| c.params).collect();
    println!("spread {:.2}%", 100.0 * param_spread(&counts));
    Ok(())
}
