use crate::backprop::loss_grad_mse;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("prediction has {got} entries, target has {expected}")]
    Length { expected: usize, got: usize },
    #[error("class index {class} out of range for {num_classes} outputs")]
    InvalidClass { class: usize, num_classes: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Mse,
    SoftmaxXent,
}

/// What one sample should produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<'a> {
    Class(usize),
    Values(&'a [f64]),
}

/// `(1/m) * sum (ŷ - y)^2`.
pub fn mse_loss(y_hat: &[f64], y: &[f64], m: usize) -> Result<f64, LossError> {
    if y_hat.len() != y.len() {
        return Err(LossError::Length {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    if m == 0 {
        return Err(LossError::EmptyBatch);
    }
    let sq: f64 = y_hat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sq / m as f64)
}

/// Cross-entropy of `softmax(logits)` against `class`, with its gradient
/// `softmax - one_hot`.
pub fn softmax_xent(logits: &[f64], class: usize) -> Result<(f64, Vec<f64>), LossError> {
    if class >= logits.len() {
        return Err(LossError::InvalidClass {
            class,
            num_classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let loss = total.ln() + max - logits[class];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / total).collect();
    grad[class] -= 1.0;
    Ok((loss, grad))
}

fn one_hot(class: usize, len: usize) -> Result<Vec<f64>, LossError> {
    if class >= len {
        return Err(LossError::InvalidClass {
            class,
            num_classes: len,
        });
    }
    let mut v = vec![0.0; len];
    v[class] = 1.0;
    Ok(v)
}

impl Loss {
    /// Loss contribution of one sample in a batch of `m`, and `dL/dŷ`.
    pub fn evaluate(
        self,
        y_hat: &[f64],
        target: Target<'_>,
        m: usize,
    ) -> Result<(f64, Vec<f64>), LossError> {
        if m == 0 {
            return Err(LossError::EmptyBatch);
        }
        match (self, target) {
            (Loss::Mse, Target::Values(y)) => Ok((mse_loss(y_hat, y, m)?, loss_grad_mse(y_hat, y, m)?)),
            (Loss::Mse, Target::Class(c)) => {
                let y = one_hot(c, y_hat.len())?;
                Ok((mse_loss(y_hat, &y, m)?, loss_grad_mse(y_hat, &y, m)?))
            }
            (Loss::SoftmaxXent, Target::Class(c)) => {
                let (loss, mut grad) = softmax_xent(y_hat, c)?;
                let scale = 1.0 / m as f64;
                grad.iter_mut().for_each(|g| *g *= scale);
                Ok((loss * scale, grad))
            }
            (Loss::SoftmaxXent, Target::Values(y)) => Err(LossError::Length {
                // a regression target has no class index
                expected: 1,
                got: y.len(),
            }),
        }
    }

    pub fn value(self, y_hat: &[f64], target: Target<'_>, m: usize) -> Result<f64, LossError> {
        Ok(self.evaluate(y_hat, target, m)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_values() {
        assert_eq!(mse_loss(&[1.0, 2.0], &[1.0, 2.0], 1).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0, 1.0], &[0.0, 0.0], 1).unwrap(), 2.0);
        assert!(mse_loss(&[1.0], &[1.0, 2.0], 1).is_err());
        assert_eq!(mse_loss(&[1.0], &[1.0], 0), Err(LossError::EmptyBatch));
    }

    #[test]
    fn mse_gradient_matches_finite_differences() {
        let y = [0.3, -1.2, 0.8];
        let y_hat = [0.5, -0.7, 2.0];
        let grad = loss_grad_mse(&y_hat, &y, 4).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut plus = y_hat;
            let mut minus = y_hat;
            plus[k] += h;
            minus[k] -= h;
            let fd = (mse_loss(&plus, &y, 4).unwrap() - mse_loss(&minus, &y, 4).unwrap()) / (2.0 * h);
            assert!((fd - grad[k]).abs() <= 1e-8);
        }
    }

    #[test]
    fn uniform_logits_give_log_k() {
        let (loss, _) = softmax_xent(&[0.7; 5], 2).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn confident_logits_give_near_zero_loss() {
        let (loss, _) = softmax_xent(&[0.0, 800.0, 0.0], 1).unwrap();
        assert!(loss >= 0.0 && loss < 1e-300);
        let (wrong, _) = softmax_xent(&[0.0, 800.0, 0.0], 0).unwrap();
        assert!((wrong - 800.0).abs() < 1e-9);
    }

    #[test]
    fn softmax_gradient_sums_to_zero() {
        let (_, g) = softmax_xent(&[1.5, -0.2, 3.3, 0.0], 3).unwrap();
        assert!(g.iter().sum::<f64>().abs() <= 1e-12);
        assert!(softmax_xent(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn mse_on_classes_uses_one_hot() {
        let (l, g) = Loss::Mse.evaluate(&[0.0, 1.0, 0.0], Target::Class(1), 1).unwrap();
        assert_eq!(l, 0.0);
        assert_eq!(g, vec![0.0; 3]);
        assert!(Loss::SoftmaxXent
            .evaluate(&[0.0], Target::Values(&[1.0]), 1)
            .is_err());
    }
}
