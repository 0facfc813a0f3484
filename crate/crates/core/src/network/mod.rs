//! Layer types, forward evaluation and initialization.
//!
//! A [`Network`] is a stack of hidden layers followed by a linear output
//! layer `ŷ = W h + b`. Hidden layers come in three families:
//!
//! - [`LcnLayer`]: affine map, then a learnable spline per neuron.
//! - [`MlpLayer`]: affine map, then a fixed activation.
//! - [`KanEdgeLayer`]: a learnable spline on every edge plus a linear residual.

mod checkpoint;

pub use checkpoint::{load_network, read_network, save_network, write_network, CheckpointError};

use crate::dense::{matvec, Matrix, ShapeError};
use crate::spline::{eval_nonzero_basis, BasisSupport, KnotVector, SplineError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-width of the uniform distribution used for spline coefficients.
pub const SPLINE_INIT_SCALE: f64 = 0.1;
/// Knot domain used for hidden layers unless configured otherwise.
pub const DEFAULT_KNOT_DOMAIN: (f64, f64) = (-1.0, 1.0);
pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_NUM_BASIS: usize = 8;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("layer {layer}: pre-activation of neuron {neuron} is not finite")]
    NonFinite { layer: usize, neuron: usize },
    #[error("input contains NaN or infinite values")]
    NonFiniteInput,
    #[error("input has length {got}, network expects {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("trace does not belong to this network: {0}")]
    TraceMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// `dh/dz` given the pre-activation and the activation value. The ReLU
    /// subgradient at 0 is 0.
    pub fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => h * (1.0 - h),
            Activation::Tanh => 1.0 - h * h,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }
}

/// What a spline layer does with a point outside its knot domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainPolicy {
    /// Move to the nearest boundary; the spline path then has zero gradient.
    #[default]
    Clamp,
    /// Fail the forward pass.
    Reject,
}

/// Per-neuron learnable spline activations: `h_i = S_i(W_i · h_prev + b_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcnLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    /// One row of `num_basis` coefficients per neuron.
    pub coeffs: Matrix,
    pub knots: KnotVector,
    pub policy: DomainPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// `out_i = sum_j [ S_ij(x_j) + base_ij * x_j ]`.
///
/// Coefficients for edge `j -> i` live at `coeffs[(i * in_dim + j) * num_basis..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KanEdgeLayer {
    pub coeffs: Vec<f64>,
    pub base: Matrix,
    pub knots: KnotVector,
    pub policy: DomainPolicy,
}

/// The final affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Lcn(LcnLayer),
    Mlp(MlpLayer),
    KanEdge(KanEdgeLayer),
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        match self {
            Layer::Lcn(l) => l.weights.cols(),
            Layer::Mlp(l) => l.weights.cols(),
            Layer::KanEdge(l) => l.base.cols(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Layer::Lcn(l) => l.weights.rows(),
            Layer::Mlp(l) => l.weights.rows(),
            Layer::KanEdge(l) => l.base.rows(),
        }
    }

    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Lcn(l) => LayerSpec::Lcn {
                width: l.weights.rows(),
                num_basis: l.knots.num_basis(),
                degree: l.knots.degree(),
                domain: l.knots.domain(),
            },
            Layer::Mlp(l) => LayerSpec::Mlp {
                width: l.weights.rows(),
                activation: l.activation,
            },
            Layer::KanEdge(l) => LayerSpec::KanEdge {
                width: l.base.rows(),
                num_basis: l.knots.num_basis(),
                degree: l.knots.degree(),
                domain: l.knots.domain(),
            },
        }
    }
}

/// Architecture description for one hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Lcn {
        width: usize,
        num_basis: usize,
        degree: usize,
        domain: (f64, f64),
    },
    Mlp {
        width: usize,
        activation: Activation,
    },
    KanEdge {
        width: usize,
        num_basis: usize,
        degree: usize,
        domain: (f64, f64),
    },
}

impl LayerSpec {
    pub fn width(&self) -> usize {
        match *self {
            LayerSpec::Lcn { width, .. }
            | LayerSpec::Mlp { width, .. }
            | LayerSpec::KanEdge { width, .. } => width,
        }
    }

    pub fn lcn(width: usize, num_basis: usize, degree: usize) -> Self {
        LayerSpec::Lcn {
            width,
            num_basis,
            degree,
            domain: DEFAULT_KNOT_DOMAIN,
        }
    }

    pub fn mlp(width: usize, activation: Activation) -> Self {
        LayerSpec::Mlp { width, activation }
    }

    pub fn kan(width: usize, num_basis: usize, degree: usize) -> Self {
        LayerSpec::KanEdge {
            width,
            num_basis,
            degree,
            domain: DEFAULT_KNOT_DOMAIN,
        }
    }
}

/// Full architecture: input dim, hidden stack, output dim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub input_dim: usize,
    pub hidden: Vec<LayerSpec>,
    pub output_dim: usize,
}

impl ArchSpec {
    pub fn new(input_dim: usize, hidden: Vec<LayerSpec>, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden,
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::InvalidArchitecture(m));
        if self.input_dim == 0 || self.output_dim == 0 {
            return bad("input and output dimensions must be positive".into());
        }
        for (l, spec) in self.hidden.iter().enumerate() {
            if spec.width() == 0 {
                return bad(format!("hidden layer {l} has zero width"));
            }
            if let LayerSpec::Lcn {
                num_basis,
                degree,
                domain,
                ..
            }
            | LayerSpec::KanEdge {
                num_basis,
                degree,
                domain,
                ..
            } = *spec
            {
                KnotVector::clamped_uniform(domain.0, domain.1, num_basis, degree)
                    .map_err(|e| NetworkError::InvalidArchitecture(format!("layer {l}: {e}")))?;
            }
        }
        Ok(())
    }

    /// Width feeding the output layer.
    pub fn last_width(&self) -> usize {
        self.hidden.last().map_or(self.input_dim, LayerSpec::width)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub hidden: Vec<Layer>,
    pub output: OutputLayer,
}

/// Spline evaluation record for one neuron (LCN) or one input (KAN).
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSpline {
    /// The point the spline was evaluated at, after clamping.
    pub point: f64,
    pub clamped: bool,
    pub support: BasisSupport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcnOutput {
    pub z: Vec<f64>,
    pub h: Vec<f64>,
    pub splines: Vec<ActiveSpline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpOutput {
    pub z: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KanOutput {
    pub h: Vec<f64>,
    /// One record per input coordinate; every edge leaving input `j`
    /// shares the knot vector and therefore the support.
    pub splines: Vec<ActiveSpline>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerTrace {
    Lcn(LcnOutput),
    Mlp(MlpOutput),
    KanEdge(KanOutput),
}

impl LayerTrace {
    pub fn activations(&self) -> &[f64] {
        match self {
            LayerTrace::Lcn(t) => &t.h,
            LayerTrace::Mlp(t) => &t.h,
            LayerTrace::KanEdge(t) => &t.h,
        }
    }

    pub fn splines(&self) -> &[ActiveSpline] {
        match self {
            LayerTrace::Lcn(t) => &t.splines,
            LayerTrace::KanEdge(t) => &t.splines,
            LayerTrace::Mlp(_) => &[],
        }
    }
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pub layers: Vec<LayerTrace>,
    pub output: Vec<f64>,
}

impl ForwardTrace {
    /// Input to hidden layer `l` (or to the output layer when `l == layers.len()`).
    pub fn layer_input(&self, l: usize) -> &[f64] {
        if l == 0 {
            &self.input
        } else {
            self.layers[l - 1].activations()
        }
    }

    /// (clamped, total) spline evaluations in this trace.
    pub fn clamp_counts(&self) -> (usize, usize) {
        self.layers
            .iter()
            .flat_map(LayerTrace::splines)
            .fold((0, 0), |(c, t), s| (c + usize::from(s.clamped), t + 1))
    }
}

fn place_in_domain(
    knots: &KnotVector,
    policy: DomainPolicy,
    x: f64,
) -> Result<(f64, bool), SplineError> {
    if knots.contains(x) {
        return Ok((x, false));
    }
    match policy {
        DomainPolicy::Clamp => Ok((knots.clamp(x), true)),
        DomainPolicy::Reject => {
            let (lo, hi) = knots.domain();
            Err(SplineError::OutOfDomain { x, lo, hi })
        }
    }
}

fn affine(weights: &Matrix, bias: &[f64], input: &[f64]) -> Result<Vec<f64>, ShapeError> {
    let mut z = matvec(weights, input)?;
    for (zi, bi) in z.iter_mut().zip(bias) {
        *zi += bi;
    }
    Ok(z)
}

fn evaluate_spline_point(
    knots: &KnotVector,
    policy: DomainPolicy,
    x: f64,
) -> Result<ActiveSpline, SplineError> {
    let (point, clamped) = place_in_domain(knots, policy, x)?;
    let support = eval_nonzero_basis(knots, point)?;
    Ok(ActiveSpline {
        point,
        clamped,
        support,
    })
}

/// `z = W h_prev + b`, then `h_i = S_i(z_i)` over the active basis functions.
pub fn lcn_forward(layer: &LcnLayer, h_prev: &[f64]) -> Result<LcnOutput, NetworkError> {
    let z = affine(&layer.weights, &layer.bias, h_prev)?;
    let mut h = Vec::with_capacity(z.len());
    let mut splines = Vec::with_capacity(z.len());
    for (i, &zi) in z.iter().enumerate() {
        if !zi.is_finite() {
            return Err(NetworkError::NonFinite {
                layer: 0,
                neuron: i,
            });
        }
        let active = evaluate_spline_point(&layer.knots, layer.policy, zi)?;
        h.push(active.support.combine(layer.coeffs.row(i)));
        splines.push(active);
    }
    Ok(LcnOutput { z, h, splines })
}

pub fn mlp_forward(layer: &MlpLayer, h_prev: &[f64]) -> Result<MlpOutput, NetworkError> {
    let z = affine(&layer.weights, &layer.bias, h_prev)?;
    let h = z.iter().map(|&v| layer.activation.apply(v)).collect();
    Ok(MlpOutput { z, h })
}

pub fn kan_edge_forward(layer: &KanEdgeLayer, h_prev: &[f64]) -> Result<KanOutput, NetworkError> {
    let (out_dim, in_dim) = layer.base.shape();
    if h_prev.len() != in_dim {
        return Err(ShapeError::Mismatch {
            op: "kan_edge_forward",
            expected: in_dim.to_string(),
            got: h_prev.len().to_string(),
        }
        .into());
    }
    let nb = layer.knots.num_basis();
    let splines = h_prev
        .iter()
        .map(|&x| {
            if x.is_finite() {
                Ok(evaluate_spline_point(&layer.knots, layer.policy, x)?)
            } else {
                Err(NetworkError::NonFiniteInput)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let h = (0..out_dim)
        .map(|i| {
            let base = layer.base.row(i);
            (0..in_dim)
                .map(|j| {
                    let c = &layer.coeffs[(i * in_dim + j) * nb..(i * in_dim + j + 1) * nb];
                    splines[j].support.combine(c) + base[j] * h_prev[j]
                })
                .sum()
        })
        .collect();
    Ok(KanOutput { h, splines })
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.hidden
            .first()
            .map_or(self.output.weights.cols(), Layer::input_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.output.weights.rows()
    }

    pub fn arch(&self) -> ArchSpec {
        ArchSpec {
            input_dim: self.input_dim(),
            hidden: self.hidden.iter().map(Layer::spec).collect(),
            output_dim: self.output_dim(),
        }
    }

    /// Checks that adjacent layers chain and all parameter shapes agree.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::InvalidArchitecture(m));
        let mut width = self.input_dim();
        for (l, layer) in self.hidden.iter().enumerate() {
            if layer.input_dim() != width {
                return bad(format!(
                    "layer {l} expects {} inputs, previous width is {width}",
                    layer.input_dim()
                ));
            }
            let out = layer.output_dim();
            match layer {
                Layer::Lcn(lcn) => {
                    if lcn.bias.len() != out
                        || lcn.coeffs.shape() != (out, lcn.knots.num_basis())
                    {
                        return bad(format!("layer {l}: LCN parameter shapes disagree"));
                    }
                }
                Layer::Mlp(mlp) => {
                    if mlp.bias.len() != out {
                        return bad(format!("layer {l}: MLP bias length {}", mlp.bias.len()));
                    }
                }
                Layer::KanEdge(kan) => {
                    if kan.coeffs.len() != out * width * kan.knots.num_basis() {
                        return bad(format!("layer {l}: KAN coefficient tensor size"));
                    }
                }
            }
            width = out;
        }
        if self.output.weights.cols() != width || self.output.bias.len() != self.output_dim() {
            return bad("output layer shape disagrees with last hidden width".into());
        }
        Ok(())
    }

    /// Runs every layer and keeps the quantities backprop needs.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace, NetworkError> {
        if x.len() != self.input_dim() {
            return Err(NetworkError::InputDim {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::NonFiniteInput);
        }
        let mut layers: Vec<LayerTrace> = Vec::with_capacity(self.hidden.len());
        for (l, layer) in self.hidden.iter().enumerate() {
            let input = layers.last().map_or(x, LayerTrace::activations);
            let trace = match layer {
                Layer::Lcn(lcn) => LayerTrace::Lcn(lcn_forward(lcn, input).map_err(|e| match e {
                    NetworkError::NonFinite { neuron, .. } => {
                        NetworkError::NonFinite { layer: l, neuron }
                    }
                    other => other,
                })?),
                Layer::Mlp(mlp) => LayerTrace::Mlp(mlp_forward(mlp, input)?),
                Layer::KanEdge(kan) => LayerTrace::KanEdge(kan_edge_forward(kan, input)?),
            };
            layers.push(trace);
        }
        let last = layers.last().map_or(x, LayerTrace::activations);
        let output = affine(&self.output.weights, &self.output.bias, last)?;
        Ok(ForwardTrace {
            input: x.to_vec(),
            layers,
            output,
        })
    }

    /// Just `ŷ`.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        Ok(self.forward(x)?.output)
    }

    /// Parameter blocks in a fixed order: per hidden layer
    /// (LCN: W, b, coeffs; MLP: W, b; KAN: coeffs, base), then output W, b.
    pub fn param_segments(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.hidden {
            match layer {
                Layer::Lcn(l) => {
                    out.extend([l.weights.data(), &l.bias[..], l.coeffs.data()]);
                }
                Layer::Mlp(l) => out.extend([l.weights.data(), &l.bias[..]]),
                Layer::KanEdge(l) => out.extend([&l.coeffs[..], l.base.data()]),
            }
        }
        out.extend([self.output.weights.data(), &self.output.bias[..]]);
        out
    }

    /// Mutable counterpart of [`Network::param_segments`], same order.
    pub fn param_segments_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.hidden {
            match layer {
                Layer::Lcn(l) => {
                    out.push(l.weights.data_mut());
                    out.push(&mut l.bias[..]);
                    out.push(l.coeffs.data_mut());
                }
                Layer::Mlp(l) => {
                    out.push(l.weights.data_mut());
                    out.push(&mut l.bias[..]);
                }
                Layer::KanEdge(l) => {
                    out.push(&mut l.coeffs[..]);
                    out.push(l.base.data_mut());
                }
            }
        }
        out.push(self.output.weights.data_mut());
        out.push(&mut self.output.bias[..]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_segments().iter().map(|s| s.len()).sum()
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..=scale)).collect()
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::new(rows, cols, uniform_vec(rng, rows * cols, scale)).expect("finite by construction")
}

/// Builds a network with deterministic random parameters.
///
/// Affine weights and biases are uniform in `±1/sqrt(fan_in)`; spline
/// coefficients are uniform in `±SPLINE_INIT_SCALE`.
pub fn init_network(arch: &ArchSpec, seed: u64) -> Result<Network, NetworkError> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fan_in = arch.input_dim;
    let mut hidden = Vec::with_capacity(arch.hidden.len());
    for spec in &arch.hidden {
        let scale = 1.0 / (fan_in as f64).sqrt();
        let layer = match *spec {
            LayerSpec::Lcn {
                width,
                num_basis,
                degree,
                domain,
            } => {
                let knots = KnotVector::clamped_uniform(domain.0, domain.1, num_basis, degree)?;
                Layer::Lcn(LcnLayer {
                    weights: uniform_matrix(&mut rng, width, fan_in, scale),
                    bias: uniform_vec(&mut rng, width, scale),
                    coeffs: uniform_matrix(&mut rng, width, num_basis, SPLINE_INIT_SCALE),
                    knots,
                    policy: DomainPolicy::Clamp,
                })
            }
            LayerSpec::Mlp { width, activation } => Layer::Mlp(MlpLayer {
                weights: uniform_matrix(&mut rng, width, fan_in, scale),
                bias: uniform_vec(&mut rng, width, scale),
                activation,
            }),
            LayerSpec::KanEdge {
                width,
                num_basis,
                degree,
                domain,
            } => {
                let knots = KnotVector::clamped_uniform(domain.0, domain.1, num_basis, degree)?;
                Layer::KanEdge(KanEdgeLayer {
                    coeffs: uniform_vec(&mut rng, width * fan_in * num_basis, SPLINE_INIT_SCALE),
                    base: uniform_matrix(&mut rng, width, fan_in, scale),
                    knots,
                    policy: DomainPolicy::Clamp,
                })
            }
        };
        fan_in = spec.width();
        hidden.push(layer);
    }
    let scale = 1.0 / (fan_in as f64).sqrt();
    let output = OutputLayer {
        weights: uniform_matrix(&mut rng, arch.output_dim, fan_in, scale),
        bias: uniform_vec(&mut rng, arch.output_dim, scale),
    };
    Ok(Network { hidden, output })
}
