//! Clamped B-spline bases: values, local support and derivatives.
//!
//! `cargo run --example spline_basics`

use lcn::spline::{eval_basis, eval_nonzero_basis, eval_spline, eval_spline_derivative, KnotVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kv = KnotVector::clamped_uniform(-1.0, 1.0, 8, 3)?;
    println!("cubic basis, N = 8, knots {:?}", kv.knots());

    println!("\n    x   sum(B)   non-zero basis functions");
    for x in [-1.0, -0.7, -0.2, 0.0, 0.45, 0.9, 1.0] {
        let all: Vec<f64> = (0..kv.num_basis()).map(|n| eval_basis(&kv, n, x)).collect::<Result<_, _>>()?;
        let local = eval_nonzero_basis(&kv, x)?;
        let listed: Vec<String> = local
            .indices()
            .zip(&local.values)
            .map(|(n, v)| format!("B{n}={v:.4}"))
            .collect();
        println!("{x:>5.2}  {:.6}   {}", all.iter().sum::<f64>(), listed.join(" "));
    }

    // a spline with hand-picked coefficients and its slope
    let coeffs = [0.0, 0.5, -0.5, 1.0, 1.0, -1.0, 0.25, 0.0];
    println!("\n    x   s(x)      s'(x)");
    for i in 0..=8 {
        let x = -1.0 + 0.25 * i as f64;
        println!(
            "{x:>5.2}  {:>8.4}  {:>8.4}",
            eval_spline(&coeffs, &kv, x)?,
            eval_spline_derivative(&coeffs, &kv, x)?
        );
    }
    Ok(())
}
