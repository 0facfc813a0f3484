//! Backpropagation against central finite differences for each layer family.
//!
//! `cargo run --example gradient_check`

use lcn::backprop::{finite_diff_gradient, gradient_check, sample_gradient};
use lcn::{init_network, Activation, ArchSpec, LayerSpec, Loss, Target};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nets = [
        ("lcn", vec![LayerSpec::lcn(5, 8, 3), LayerSpec::lcn(4, 6, 2)]),
        ("mlp", vec![LayerSpec::mlp(5, Activation::Tanh), LayerSpec::mlp(4, Activation::Sigmoid)]),
        ("kan", vec![LayerSpec::kan(4, 7, 3), LayerSpec::kan(3, 5, 1)]),
        ("mixed", vec![LayerSpec::kan(3, 6, 2), LayerSpec::lcn(4, 9, 3), LayerSpec::mlp(3, Activation::Relu)]),
    ];
    let x = [0.31, 0.77, 0.05];
    let y = [0.5, -0.25];
    println!("{:<6} {:>7} {:>12} {:>12}", "net", "params", "mse", "softmax-xent");
    for (name, hidden) in nets {
        let net = init_network(&ArchSpec::new(3, hidden, 2), 11)?;
        let mse = gradient_check(&net, &x, Target::Values(&y), Loss::Mse, 1e-6)?;
        let xent = gradient_check(&net, &x, Target::Class(1), Loss::SoftmaxXent, 1e-6)?;
        println!(
            "{name:<6} {:>7} {:>12.2e} {:>12.2e}",
            net.num_params(),
            mse.max_rel_error,
            xent.max_rel_error
        );
    }

    // the first few output-weight gradients side by side
    let net = init_network(&ArchSpec::new(3, vec![LayerSpec::lcn(4, 8, 3)], 2), 1)?;
    let (_, analytic, _) = sample_gradient(&net, &x, Target::Class(0), Loss::SoftmaxXent, 1)?;
    let numeric = finite_diff_gradient(&net, &x, Target::Class(0), Loss::SoftmaxXent, 1e-6)?;
    let last = analytic.segments().len() - 2;
    println!("\noutput weights: analytic vs numeric");
    for (a, n) in analytic.segments()[last].iter().zip(numeric.segments()[last]).take(4) {
        println!("  {a:>+.12e}  {n:>+.12e}");
    }
    Ok(())
}
