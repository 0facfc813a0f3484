//! Single-sample loss in double-double arithmetic.
//!
//! Central differences lose about `eps * |L| / h` to rounding, which in plain
//! `f64` swamps gradients below roughly `1e-6`. Evaluating the loss with
//! ~32 significant digits leaves only the `O(h²)` truncation term. The forward
//! pass here is written independently of the `f64` one: basis functions come
//! from the triangular (non-zero only) recurrence rather than Cox–de Boor rows.
//!

use super::BackpropError;
use crate::network::{Activation, DomainPolicy, Layer, Network};
use crate::spline::{KnotVector, SplineError};
use crate::training::{LossError, Target};
use crate::training::Loss;
use dd::Dd;

mod dd;

/// Parameters of `net` lifted to double-double, in `param_segments` order.
pub(super) fn lift_params(net: &Network) -> Vec<Vec<Dd>> {
    net.param_segments()
        .iter()
        .map(|s| s.iter().map(|&v| Dd::from(v)).collect())
        .collect()
}

pub(super) fn lift(v: &[f64]) -> Vec<Dd> {
    v.iter().map(|&x| Dd::from(x)).collect()
}

/// `e^x` to double-double accuracy: `x = k ln 2 + r`, Taylor series for
/// `e^(r / 2^10) - 1`, then ten squarings kept in `s(s + 2)` form.
fn exp(x: Dd) -> Dd {
    const HALVINGS: i32 = 10;
    if x.hi() < -700.0 {
        return Dd::from(0.0);
    }
    let k = (x.hi() / std::f64::consts::LN_2).round();
    let r = (x - dd::LN_2 * k) / f64::from(1 << HALVINGS);
    // |r| <= 3.4e-4, so nine terms reach 1e-37
    let mut term = r;
    let mut s = r;
    for n in 2..=9 {
        term = term * r / f64::from(n);
        s += term;
    }
    for _ in 0..HALVINGS {
        s = s * (s + 2.0);
    }
    (s + 1.0) * 2f64.powi(k as i32)
}

/// Natural log by two Newton steps on `exp`.
fn ln(x: Dd) -> Dd {
    let mut y = Dd::from(x.hi().ln());
    for _ in 0..2 {
        y = y + x * exp(-y) - 1.0;
    }
    y
}

fn affine(w: &[Dd], b: &[Dd], x: &[Dd]) -> Vec<Dd> {
    b.iter()
        .enumerate()
        .map(|(i, &bi)| {
            x.iter()
                .enumerate()
                .fold(bi, |acc, (j, &xj)| acc + w[i * x.len() + j] * xj)
        })
        .collect()
}

/// Clamps or rejects, then returns the first active index and the `p + 1`
/// non-zero basis values at `u`.
fn active_basis(kv: &KnotVector, policy: DomainPolicy, u: Dd) -> Result<(usize, Vec<Dd>), BackpropError> {
    let (lo, hi) = kv.domain();
    let u = if u < lo || u > hi {
        match policy {
            DomainPolicy::Clamp => Dd::from(if u < lo { lo } else { hi }),
            DomainPolicy::Reject => {
                return Err(SplineError::OutOfDomain { x: u.hi(), lo, hi }.into());
            }
        }
    } else {
        u
    };
    let knots = kv.knots();
    let p = kv.degree();
    let last = kv.num_basis() - 1;
    // largest span with knots[span] <= u < knots[span + 1]; the right end
    // belongs to the last non-empty span
    let span = if u >= hi {
        (p..=last).rev().find(|&k| knots[k] < knots[k + 1]).unwrap_or(last)
    } else {
        (p..=last).rev().find(|&k| Dd::from(knots[k]) <= u).unwrap_or(p)
    };
    let mut n = vec![Dd::from(0.0); p + 1];
    let mut left = vec![Dd::from(0.0); p + 1];
    let mut right = vec![Dd::from(0.0); p + 1];
    n[0] = Dd::from(1.0);
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = Dd::from(knots[span + j]) - u;
        let mut saved = Dd::from(0.0);
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    Ok((span - p, n))
}

fn activate(act: Activation, z: Dd) -> Dd {
    match act {
        Activation::Relu => {
            if z > 0.0 {
                z
            } else {
                Dd::from(0.0)
            }
        }
        Activation::Sigmoid => Dd::from(1.0) / (Dd::from(1.0) + exp(-z)),
        Activation::Tanh => {
            let e = exp(z * 2.0);
            (e - 1.0) / (e + 1.0)
        }
    }
}

fn forward(net: &Network, params: &[Vec<Dd>], x: &[Dd]) -> Result<Vec<Dd>, BackpropError> {
    let mut s = 0;
    let mut h = x.to_vec();
    for layer in &net.hidden {
        h = match layer {
            Layer::Lcn(l) => {
                let (w, b, c) = (&params[s], &params[s + 1], &params[s + 2]);
                s += 3;
                let nb = l.knots.num_basis();
                affine(w, b, &h)
                    .into_iter()
                    .enumerate()
                    .map(|(i, z)| {
                        let (first, vals) = active_basis(&l.knots, l.policy, z)?;
                        Ok(vals
                            .iter()
                            .enumerate()
                            .fold(Dd::from(0.0), |acc, (t, &v)| acc + c[i * nb + first + t] * v))
                    })
                    .collect::<Result<_, BackpropError>>()?
            }
            Layer::Mlp(l) => {
                let (w, b) = (&params[s], &params[s + 1]);
                s += 2;
                affine(w, b, &h)
                    .into_iter()
                    .map(|z| activate(l.activation, z))
                    .collect()
            }
            Layer::KanEdge(l) => {
                let (c, base) = (&params[s], &params[s + 1]);
                s += 2;
                let nb = l.knots.num_basis();
                let in_dim = h.len();
                let out_dim = base.len() / in_dim;
                let supports = h
                    .iter()
                    .map(|&v| active_basis(&l.knots, l.policy, v))
                    .collect::<Result<Vec<_>, _>>()?;
                (0..out_dim)
                    .map(|i| {
                        (0..in_dim).fold(Dd::from(0.0), |acc, j| {
                            let (first, vals) = &supports[j];
                            let edge = &c[(i * in_dim + j) * nb..];
                            let spline = vals
                                .iter()
                                .enumerate()
                                .fold(Dd::from(0.0), |a, (t, &v)| a + edge[first + t] * v);
                            acc + spline + base[i * in_dim + j] * h[j]
                        })
                    })
                    .collect()
            }
        };
    }
    Ok(affine(&params[s], &params[s + 1], &h))
}

fn loss_of(y_hat: &[Dd], target: Target<'_>, loss: Loss) -> Result<Dd, BackpropError> {
    let sq = |y: &[f64]| -> Result<Dd, BackpropError> {
        if y.len() != y_hat.len() {
            return Err(LossError::Length {
                expected: y.len(),
                got: y_hat.len(),
            }
            .into());
        }
        Ok(y_hat
            .iter()
            .zip(y)
            .fold(Dd::from(0.0), |acc, (&a, &b)| acc + (a - b) * (a - b)))
    };
    match (loss, target) {
        (Loss::Mse, Target::Values(y)) => sq(y),
        (_, Target::Class(c)) if c >= y_hat.len() => Err(LossError::InvalidClass {
            class: c,
            num_classes: y_hat.len(),
        }
        .into()),
        (Loss::Mse, Target::Class(c)) => {
            let mut y = vec![0.0; y_hat.len()];
            y[c] = 1.0;
            sq(&y)
        }
        (Loss::SoftmaxXent, Target::Class(c)) => {
            let max = y_hat.iter().copied().fold(y_hat[0], |m, v| if v > m { v } else { m });
            let total = y_hat.iter().fold(Dd::from(0.0), |acc, &l| acc + exp(l - max));
            Ok(ln(total) + max - y_hat[c])
        }
        (Loss::SoftmaxXent, Target::Values(y)) => Err(LossError::Length {
            expected: 1,
            got: y.len(),
        }
        .into()),
    }
}

/// Loss of one sample (batch size 1) for lifted parameters and input.
pub(super) fn sample_loss(
    net: &Network,
    params: &[Vec<Dd>],
    x: &[Dd],
    target: Target<'_>,
    loss: Loss,
) -> Result<Dd, BackpropError> {
    let v = loss_of(&forward(net, params, x)?, target, loss)?;
    if v.hi().is_finite() {
        Ok(v)
    } else {
        Err(BackpropError::NonFiniteLoss)
    }
}
