//! Parameter and forward-FLOP accounting.
//!
//! FLOP convention, per sample:
//!
//! | piece | FLOPs |
//! |-------|-------|
//! | affine `M x M_prev` plus bias | `2·M·M_prev + M` |
//! | ReLU | `M` |
//! | sigmoid, tanh | `4·M` |
//! | one spline evaluation of degree `p` | `3·p·(p+1)/2 + 2·(p+1)` |
//! | KAN edge: spline + base term + accumulate | spline cost `+ 3` |
//!
//! Knot vectors are fixed and not counted as parameters. Clamping is free.

use crate::network::{Activation, ArchSpec, LayerSpec, Network};
use serde::Serialize;

/// de Boor local evaluation: `p(p+1)/2` blending nodes at 3 FLOPs each, then
/// the `p+1` term weighted sum with multiply-adds counted as 2.
pub fn spline_eval_flops(degree: usize) -> usize {
    3 * degree * (degree + 1) / 2 + 2 * (degree + 1)
}

pub fn affine_flops(fan_in: usize, fan_out: usize) -> usize {
    2 * fan_out * fan_in + fan_out
}

pub fn activation_flops(act: Activation, width: usize) -> usize {
    match act {
        Activation::Relu => width,
        Activation::Sigmoid | Activation::Tanh => 4 * width,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerCost {
    pub name: String,
    pub params: usize,
    pub flops: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub params: usize,
    pub flops: usize,
    pub layers: Vec<LayerCost>,
}

fn hidden_cost(fan_in: usize, spec: &LayerSpec) -> LayerCost {
    match *spec {
        LayerSpec::Mlp { width, activation } => LayerCost {
            name: format!("mlp[{width},{}]", activation.name()),
            params: width * fan_in + width,
            flops: affine_flops(fan_in, width) + activation_flops(activation, width),
        },
        LayerSpec::Lcn {
            width,
            num_basis,
            degree,
            ..
        } => LayerCost {
            name: format!("lcn[{width},N={num_basis},p={degree}]"),
            params: width * fan_in + width + width * num_basis,
            flops: affine_flops(fan_in, width) + width * spline_eval_flops(degree),
        },
        LayerSpec::KanEdge {
            width,
            num_basis,
            degree,
            ..
        } => LayerCost {
            name: format!("kan[{width},N={num_basis},p={degree}]"),
            params: width * fan_in * (num_basis + 1),
            flops: width * fan_in * (spline_eval_flops(degree) + 3),
        },
    }
}

/// Per-layer and total cost of an architecture.
pub fn cost_report(arch: &ArchSpec) -> CostReport {
    let mut layers = Vec::with_capacity(arch.hidden.len() + 1);
    let mut fan_in = arch.input_dim;
    for spec in &arch.hidden {
        layers.push(hidden_cost(fan_in, spec));
        fan_in = spec.width();
    }
    let o = arch.output_dim;
    layers.push(LayerCost {
        name: format!("output[{o}]"),
        params: o * fan_in + o,
        flops: affine_flops(fan_in, o),
    });
    CostReport {
        params: layers.iter().map(|l| l.params).sum(),
        flops: layers.iter().map(|l| l.flops).sum(),
        layers,
    }
}

pub fn count_params(net: &Network) -> usize {
    cost_report(&net.arch()).params
}

pub fn count_flops(net: &Network) -> usize {
    cost_report(&net.arch()).flops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_network;
    use proptest::prelude::*;

    #[test]
    fn hand_counted_fixtures() {
        let mlp = ArchSpec::new(4, vec![LayerSpec::mlp(3, Activation::Relu)], 2);
        assert_eq!(cost_report(&mlp).params, 23);
        let lcn = ArchSpec::new(4, vec![LayerSpec::lcn(3, 8, 3)], 2);
        assert_eq!(cost_report(&lcn).params, 47);
        let linear = ArchSpec::new(4, vec![], 2);
        assert_eq!(cost_report(&linear).params, 2 * 4 + 2);
        assert_eq!(cost_report(&linear).flops, 18);
        assert_eq!(spline_eval_flops(3), 26);
    }

    #[test]
    fn activation_adds_exactly_its_cost() {
        let relu = cost_report(&ArchSpec::new(4, vec![LayerSpec::mlp(5, Activation::Relu)], 2));
        let tanh = cost_report(&ArchSpec::new(4, vec![LayerSpec::mlp(5, Activation::Tanh)], 2));
        assert_eq!(relu.layers[0].flops, affine_flops(4, 5) + 5);
        assert_eq!(tanh.flops - relu.flops, 15);
        let lcn = cost_report(&ArchSpec::new(4, vec![LayerSpec::lcn(5, 8, 3)], 2));
        assert_eq!(lcn.flops - relu.flops, 5 * 26 - 5);
    }

    fn layer_strategy() -> impl Strategy<Value = LayerSpec> {
        prop_oneof![
            (1usize..7).prop_map(|w| LayerSpec::mlp(w, Activation::Tanh)),
            (1usize..7, 0usize..4, 0usize..5).prop_map(|(w, p, e)| LayerSpec::lcn(w, p + 1 + e, p)),
            (1usize..5, 0usize..4, 0usize..5).prop_map(|(w, p, e)| LayerSpec::kan(w, p + 1 + e, p)),
        ]
    }

    proptest! {
        #[test]
        fn params_match_optimizer_view(
            d in 1usize..6,
            o in 1usize..4,
            hidden in proptest::collection::vec(layer_strategy(), 0..4),
        ) {
            let arch = ArchSpec::new(d, hidden, o);
            let report = cost_report(&arch);
            let net = init_network(&arch, 0).unwrap();
            prop_assert_eq!(report.params, net.num_params());
            let tape = crate::backprop::GradientTape::zeros_like(&net);
            prop_assert_eq!(report.params, tape.num_params());
            prop_assert_eq!(report.params, report.layers.iter().map(|l| l.params).sum::<usize>());
            prop_assert_eq!(report.flops, report.layers.iter().map(|l| l.flops).sum::<usize>());
        }

        /// Deepening: append a layer as wide as the current last layer.
        #[test]
        fn adding_a_layer_adds_flops(
            d in 1usize..6,
            o in 1usize..4,
            hidden in proptest::collection::vec(layer_strategy(), 0..3),
            extra in layer_strategy(),
        ) {
            let arch = ArchSpec::new(d, hidden.clone(), o);
            let before = cost_report(&arch).flops;
            let w = arch.last_width();
            let extra = match extra {
                LayerSpec::Mlp { activation, .. } => LayerSpec::mlp(w, activation),
                LayerSpec::Lcn { num_basis, degree, .. } => LayerSpec::lcn(w, num_basis, degree),
                LayerSpec::KanEdge { num_basis, degree, .. } => LayerSpec::kan(w, num_basis, degree),
            };
            let mut longer = hidden;
            longer.push(extra);
            let after = cost_report(&ArchSpec::new(d, longer, o)).flops;
            prop_assert!(after > before);
        }
    }
}
