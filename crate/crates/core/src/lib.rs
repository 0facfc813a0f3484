//! Local Control Networks: feed-forward networks whose hidden neurons each
//! carry their own learnable B-spline activation, plus MLP and KAN-style
//! edge-spline baselines, manual backpropagation, data loaders, cost
//! accounting and parameter-matched sweeps.

pub mod analysis;
pub mod backprop;
pub mod cli;
pub mod data;
pub mod dense;
pub mod network;
pub mod spline;
pub mod training;

pub use backprop::{backward, gradient_check, sample_gradient, GradCheck, GradientTape};
pub use data::{Dataset, Targets};
pub use dense::Matrix;
pub use network::{init_network, Activation, ArchSpec, LayerSpec, Network};
pub use spline::KnotVector;
pub use training::{evaluate, train, Evaluation, Loss, Target, TrainConfig};
