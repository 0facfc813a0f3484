//! Reverse-mode gradients for every layer family, and a central-difference
//! oracle to check them against.
//!
//! The backward pass is the ordinary layer-by-layer chain rule. For an LCN
//! neuron with `h_i = S_i(z_i)`:
//!
//! - `dL/dz_i = dL/dh_i * S_i'(z_i)`, where `S_i'` uses only the `p + 1`
//!   active basis derivatives (zero if `z_i` was clamped),
//! - `dL/dw_{i,n} = dL/dh_i * B_n(z_i)`, non-zero on the active support only,
//! - `dL/dW_ij = dL/dz_i * h_j`, `dL/db_i = dL/dz_i`,
//! - `dL/dh_prev = Wᵀ dL/dz`.

use crate::dense::{outer_accumulate, transpose_matvec, Matrix, ShapeError};
use crate::network::{
    ActiveSpline, ForwardTrace, KanEdgeLayer, Layer, LayerTrace, LcnLayer, Network, NetworkError,
};
use crate::spline::{eval_nonzero_basis_with_derivatives, SplineError};
use crate::training::loss::{Loss, LossError, Target};
use thiserror::Error;

mod precise;

#[derive(Debug, Error)]
pub enum BackpropError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("trace does not match network: {0}")]
    TraceMismatch(String),
    #[error("finite-difference step {0} outside [1e-8, 1e-3]")]
    StepSize(f64),
    #[error("loss is not finite during finite differencing")]
    NonFiniteLoss,
}

/// Gradient of one hidden layer, shaped like its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad {
    Lcn {
        weights: Matrix,
        bias: Vec<f64>,
        coeffs: Matrix,
    },
    Mlp {
        weights: Matrix,
        bias: Vec<f64>,
    },
    KanEdge {
        coeffs: Vec<f64>,
        base: Matrix,
    },
}

/// Parameter gradients mirroring a [`Network`], plus `dL/dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub layers: Vec<LayerGrad>,
    pub output_weights: Matrix,
    pub output_bias: Vec<f64>,
    pub input: Vec<f64>,
}

impl GradientTape {
    pub fn zeros_like(net: &Network) -> Self {
        let layers = net
            .hidden
            .iter()
            .map(|layer| match layer {
                Layer::Lcn(l) => LayerGrad::Lcn {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                    coeffs: Matrix::zeros(l.coeffs.rows(), l.coeffs.cols()),
                },
                Layer::Mlp(l) => LayerGrad::Mlp {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                },
                Layer::KanEdge(l) => LayerGrad::KanEdge {
                    coeffs: vec![0.0; l.coeffs.len()],
                    base: Matrix::zeros(l.base.rows(), l.base.cols()),
                },
            })
            .collect();
        Self {
            layers,
            output_weights: Matrix::zeros(net.output.weights.rows(), net.output.weights.cols()),
            output_bias: vec![0.0; net.output.bias.len()],
            input: vec![0.0; net.input_dim()],
        }
    }

    /// Same block order as [`Network::param_segments`].
    pub fn segments(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for g in &self.layers {
            match g {
                LayerGrad::Lcn {
                    weights,
                    bias,
                    coeffs,
                } => out.extend([weights.data(), &bias[..], coeffs.data()]),
                LayerGrad::Mlp { weights, bias } => out.extend([weights.data(), &bias[..]]),
                LayerGrad::KanEdge { coeffs, base } => out.extend([&coeffs[..], base.data()]),
            }
        }
        out.extend([self.output_weights.data(), &self.output_bias[..]]);
        out
    }

    pub fn segments_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for g in &mut self.layers {
            match g {
                LayerGrad::Lcn {
                    weights,
                    bias,
                    coeffs,
                } => {
                    out.push(weights.data_mut());
                    out.push(&mut bias[..]);
                    out.push(coeffs.data_mut());
                }
                LayerGrad::Mlp { weights, bias } => {
                    out.push(weights.data_mut());
                    out.push(&mut bias[..]);
                }
                LayerGrad::KanEdge { coeffs, base } => {
                    out.push(&mut coeffs[..]);
                    out.push(base.data_mut());
                }
            }
        }
        out.push(self.output_weights.data_mut());
        out.push(&mut self.output_bias[..]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.segments().iter().map(|s| s.len()).sum()
    }

    /// Elementwise `self += other`. Shapes must match.
    pub fn accumulate(&mut self, other: &GradientTape) {
        for (a, b) in self.segments_mut().into_iter().zip(other.segments()) {
            debug_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.input.iter_mut().zip(&other.input) {
            *x += y;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.segments()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
            && self.input.iter().all(|v| v.is_finite())
    }

    /// Spline-coefficient gradient rows of LCN layer `l` (one row per neuron).
    pub fn lcn_coeff_grads(&self, l: usize) -> Option<&Matrix> {
        match self.layers.get(l)? {
            LayerGrad::Lcn { coeffs, .. } => Some(coeffs),
            _ => None,
        }
    }
}

/// `dL/dŷ = (2/m)(ŷ - y)` for the mean squared error over a batch of `m`.
pub fn loss_grad_mse(y_hat: &[f64], y: &[f64], m: usize) -> Result<Vec<f64>, LossError> {
    if y_hat.len() != y.len() {
        return Err(LossError::Length {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    if m == 0 {
        return Err(LossError::EmptyBatch);
    }
    let scale = 2.0 / m as f64;
    Ok(y_hat.iter().zip(y).map(|(a, b)| scale * (a - b)).collect())
}

fn spline_slope(
    knots: &crate::spline::KnotVector,
    coeffs: &[f64],
    active: &ActiveSpline,
) -> Result<f64, SplineError> {
    if active.clamped || knots.degree() == 0 {
        return Ok(0.0);
    }
    let (support, derivs) = eval_nonzero_basis_with_derivatives(knots, active.point)?;
    Ok(coeffs[support.indices()]
        .iter()
        .zip(&derivs)
        .map(|(c, d)| c * d)
        .sum())
}

/// `dh_i/dz_i` for every neuron of an LCN layer. Exactly zero for clamped
/// pre-activations and for degree-0 splines.
pub fn spline_activation_grad(
    layer: &LcnLayer,
    splines: &[ActiveSpline],
) -> Result<Vec<f64>, BackpropError> {
    if splines.len() != layer.coeffs.rows() {
        return Err(BackpropError::TraceMismatch(format!(
            "{} spline records for {} neurons",
            splines.len(),
            layer.coeffs.rows()
        )));
    }
    splines
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(spline_slope(&layer.knots, layer.coeffs.row(i), s)?))
        .collect()
}

fn lcn_backward(
    layer: &LcnLayer,
    splines: &[ActiveSpline],
    input: &[f64],
    dh: &[f64],
    grad: &mut LayerGrad,
) -> Result<Vec<f64>, BackpropError> {
    let LayerGrad::Lcn {
        weights,
        bias,
        coeffs,
    } = grad
    else {
        unreachable!("tape built from the same network");
    };
    let slopes = spline_activation_grad(layer, splines)?;
    let dz: Vec<f64> = dh.iter().zip(&slopes).map(|(d, s)| d * s).collect();
    for (i, s) in splines.iter().enumerate() {
        let row = coeffs.row_mut(i);
        for (n, b) in s.support.indices().zip(&s.support.values) {
            row[n] += dh[i] * b;
        }
    }
    outer_accumulate(&dz, input, weights)?;
    for (b, d) in bias.iter_mut().zip(&dz) {
        *b += d;
    }
    Ok(transpose_matvec(&layer.weights, &dz)?)
}

fn kan_backward(
    layer: &KanEdgeLayer,
    splines: &[ActiveSpline],
    input: &[f64],
    dh: &[f64],
    grad: &mut LayerGrad,
) -> Result<Vec<f64>, BackpropError> {
    let LayerGrad::KanEdge { coeffs, base } = grad else {
        unreachable!("tape built from the same network");
    };
    let (out_dim, in_dim) = layer.base.shape();
    let nb = layer.knots.num_basis();
    // basis derivatives per input, shared by every edge leaving it
    let derivs = splines
        .iter()
        .map(|s| {
            if s.clamped || layer.knots.degree() == 0 {
                Ok(None)
            } else {
                eval_nonzero_basis_with_derivatives(&layer.knots, s.point).map(|(_, d)| Some(d))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut dx = vec![0.0; in_dim];
    for i in 0..out_dim {
        let di = dh[i];
        if di == 0.0 {
            continue;
        }
        for j in 0..in_dim {
            let edge = (i * in_dim + j) * nb;
            let support = &splines[j].support;
            for (n, b) in support.indices().zip(&support.values) {
                coeffs[edge + n] += di * b;
            }
            let bw = layer.base.get(i, j);
            base.set(i, j, base.get(i, j) + di * input[j]);
            let slope = derivs[j].as_ref().map_or(0.0, |d| {
                layer.coeffs[edge + support.first_index..edge + support.first_index + d.len()]
                    .iter()
                    .zip(d)
                    .map(|(c, dv)| c * dv)
                    .sum()
            });
            dx[j] += di * (slope + bw);
        }
    }
    Ok(dx)
}

fn check_trace(net: &Network, trace: &ForwardTrace) -> Result<(), BackpropError> {
    let mismatch = |m: String| Err(BackpropError::TraceMismatch(m));
    if trace.layers.len() != net.hidden.len() {
        return mismatch(format!(
            "{} traced layers for {} hidden layers",
            trace.layers.len(),
            net.hidden.len()
        ));
    }
    if trace.input.len() != net.input_dim() || trace.output.len() != net.output_dim() {
        return mismatch("input/output length".into());
    }
    for (l, (layer, t)) in net.hidden.iter().zip(&trace.layers).enumerate() {
        let same_kind = matches!(
            (layer, t),
            (Layer::Lcn(_), LayerTrace::Lcn(_))
                | (Layer::Mlp(_), LayerTrace::Mlp(_))
                | (Layer::KanEdge(_), LayerTrace::KanEdge(_))
        );
        if !same_kind || t.activations().len() != layer.output_dim() {
            return mismatch(format!("layer {l}"));
        }
    }
    Ok(())
}

/// Reverse pass from `dL/dŷ` through the output layer and every hidden layer.
pub fn backward(
    net: &Network,
    trace: &ForwardTrace,
    dl_dyhat: &[f64],
) -> Result<GradientTape, BackpropError> {
    check_trace(net, trace)?;
    if dl_dyhat.len() != net.output_dim() {
        return Err(BackpropError::TraceMismatch(format!(
            "dL/dŷ has {} entries, network has {} outputs",
            dl_dyhat.len(),
            net.output_dim()
        )));
    }
    let mut tape = GradientTape::zeros_like(net);
    let last = trace.layer_input(net.hidden.len());
    outer_accumulate(dl_dyhat, last, &mut tape.output_weights)?;
    tape.output_bias.copy_from_slice(dl_dyhat);
    let mut dh = transpose_matvec(&net.output.weights, dl_dyhat)?;

    for l in (0..net.hidden.len()).rev() {
        let input = trace.layer_input(l);
        let grad = &mut tape.layers[l];
        dh = match (&net.hidden[l], &trace.layers[l]) {
            (Layer::Lcn(layer), LayerTrace::Lcn(t)) => {
                lcn_backward(layer, &t.splines, input, &dh, grad)?
            }
            (Layer::Mlp(layer), LayerTrace::Mlp(t)) => {
                let LayerGrad::Mlp { weights, bias } = grad else {
                    unreachable!("tape built from the same network");
                };
                let dz: Vec<f64> = dh
                    .iter()
                    .zip(t.z.iter().zip(&t.h))
                    .map(|(d, (&z, &h))| d * layer.activation.derivative(z, h))
                    .collect();
                outer_accumulate(&dz, input, weights)?;
                for (b, d) in bias.iter_mut().zip(&dz) {
                    *b += d;
                }
                transpose_matvec(&layer.weights, &dz)?
            }
            (Layer::KanEdge(layer), LayerTrace::KanEdge(t)) => {
                kan_backward(layer, &t.splines, input, &dh, grad)?
            }
            _ => unreachable!("checked by check_trace"),
        };
    }
    tape.input = dh;
    Ok(tape)
}

/// Forward, loss and backward for one sample in a batch of `m`.
pub fn sample_gradient(
    net: &Network,
    x: &[f64],
    target: Target<'_>,
    loss: Loss,
    m: usize,
) -> Result<(f64, GradientTape, ForwardTrace), BackpropError> {
    let trace = net.forward(x)?;
    let (value, dl) = loss.evaluate(&trace.output, target, m)?;
    let tape = backward(net, &trace, &dl)?;
    Ok((value, tape, trace))
}

/// Central differences `(L(θ + h) - L(θ - h)) / 2h` for every parameter and
/// every input coordinate, with batch size 1.
///
/// Losses are evaluated in double-double arithmetic, so the estimate is
/// limited by the `O(h²)` truncation term rather than `f64` rounding.
pub fn finite_diff_gradient(
    net: &Network,
    x: &[f64],
    target: Target<'_>,
    loss: Loss,
    h: f64,
) -> Result<GradientTape, BackpropError> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(BackpropError::StepSize(h));
    }
    if x.len() != net.input_dim() {
        return Err(NetworkError::InputDim {
            expected: net.input_dim(),
            got: x.len(),
        }
        .into());
    }
    let mut params = precise::lift_params(net);
    let mut xp = precise::lift(x);
    let mut tape = GradientTape::zeros_like(net);
    let two_h = 2.0 * h;
    for s in 0..params.len() {
        for i in 0..params[s].len() {
            let orig = params[s][i];
            params[s][i] = orig + h;
            let plus = precise::sample_loss(net, &params, &xp, target, loss)?;
            params[s][i] = orig - h;
            let minus = precise::sample_loss(net, &params, &xp, target, loss)?;
            params[s][i] = orig;
            tape.segments_mut()[s][i] = ((plus - minus) / two_h).hi();
        }
    }
    for d in 0..x.len() {
        let orig = xp[d];
        xp[d] = orig + h;
        let plus = precise::sample_loss(net, &params, &xp, target, loss)?;
        xp[d] = orig - h;
        let minus = precise::sample_loss(net, &params, &xp, target, loss)?;
        xp[d] = orig;
        tape.input[d] = ((plus - minus) / two_h).hi();
    }
    Ok(tape)
}

/// Worst-case comparison between an analytic and a numeric tape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// `max |a - n| / (|n| + 1e-8)` over all parameters and inputs.
    pub max_rel_error: f64,
    pub compared: usize,
}

pub fn compare_tapes(analytic: &GradientTape, numeric: &GradientTape) -> GradCheck {
    let rel = |a: f64, n: f64| (a - n).abs() / (n.abs() + 1e-8);
    let mut max_rel_error: f64 = 0.0;
    let mut compared = 0;
    let pairs = analytic
        .segments()
        .into_iter()
        .zip(numeric.segments())
        .flat_map(|(a, n)| a.iter().zip(n))
        .chain(analytic.input.iter().zip(&numeric.input));
    for (a, n) in pairs {
        max_rel_error = max_rel_error.max(rel(*a, *n));
        compared += 1;
    }
    GradCheck {
        max_rel_error,
        compared,
    }
}

/// Analytic vs central-difference gradient for one sample.
pub fn gradient_check(
    net: &Network,
    x: &[f64],
    target: Target<'_>,
    loss: Loss,
    h: f64,
) -> Result<GradCheck, BackpropError> {
    let (_, analytic, _) = sample_gradient(net, x, target, loss, 1)?;
    let numeric = finite_diff_gradient(net, x, target, loss, h)?;
    Ok(compare_tapes(&analytic, &numeric))
}
