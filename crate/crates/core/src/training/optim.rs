use crate::backprop::GradientTape;
use crate::network::Network;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// `w -= lr * g`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) {
    assert_eq!(params.len(), grads.len(), "parameter/gradient length");
    for (w, g) in params.iter_mut().zip(grads) {
        *w -= lr * g;
    }
}

/// First and second moment estimates for one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], cfg: &AdamConfig) {
        assert_eq!(params.len(), self.m.len(), "parameter/state length");
        assert_eq!(params.len(), grads.len(), "parameter/gradient length");
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let c2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for (((w, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
}

/// Optimizer over a whole network, one state block per parameter segment.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd { learning_rate: f64 },
    Adam { config: AdamConfig, states: Vec<AdamState> },
}

impl Optimizer {
    pub fn sgd(learning_rate: f64) -> Self {
        Optimizer::Sgd { learning_rate }
    }

    pub fn adam(net: &Network, config: AdamConfig) -> Self {
        let states = net
            .param_segments()
            .iter()
            .map(|s| AdamState::new(s.len()))
            .collect();
        Optimizer::Adam { config, states }
    }

    /// # Panics
    /// If the tape was not produced for a network of this shape.
    pub fn step(&mut self, net: &mut Network, tape: &GradientTape) {
        let grads = tape.segments();
        let mut params = net.param_segments_mut();
        assert_eq!(params.len(), grads.len(), "tape does not match network");
        match self {
            Optimizer::Sgd { learning_rate } => {
                for (p, g) in params.iter_mut().zip(&grads) {
                    sgd_step(p, g, *learning_rate);
                }
            }
            Optimizer::Adam { config, states } => {
                for ((p, g), s) in params.iter_mut().zip(&grads).zip(states.iter_mut()) {
                    s.step(p, g, config);
                }
            }
        }
    }
}
