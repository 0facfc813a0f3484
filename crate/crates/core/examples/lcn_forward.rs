//! One forward pass through a two-layer Local Control Network, showing each
//! neuron's pre-activation, its active basis window and whether it was clamped.
//!
//! `cargo run --example lcn_forward`

use lcn::network::LayerTrace;
use lcn::{init_network, ArchSpec, LayerSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arch = ArchSpec::new(3, vec![LayerSpec::lcn(4, 8, 3), LayerSpec::lcn(3, 6, 2)], 2);
    let net = init_network(&arch, 42)?;
    println!("{} parameters", net.num_params());

    let x = [0.2, 0.9, 0.5];
    let trace = net.forward(&x)?;
    for (l, layer) in trace.layers.iter().enumerate() {
        println!("\nhidden layer {l}");
        if let LayerTrace::Lcn(out) = layer {
            for (i, s) in out.splines.iter().enumerate() {
                let window = s.support.indices();
                println!(
                    "  neuron {i}: z = {:>7.4}, u = {:>7.4}{}  basis {}..{}  h = {:>8.5}",
                    out.z[i],
                    s.point,
                    if s.clamped { " (clamped)" } else { "" },
                    window.start,
                    window.end - 1,
                    out.h[i]
                );
            }
        }
    }
    let (clamped, total) = trace.clamp_counts();
    println!("\noutput {:?}, {clamped}/{total} pre-activations clamped", trace.output);
    Ok(())
}
