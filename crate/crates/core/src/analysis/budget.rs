//! Builds architectures of different families with near-equal parameter
//! counts.
//!
//! Each family has one hidden-layer shape repeated `depth` times. The knobs
//! searched are the hidden width for every family and additionally the basis
//! count `N` for the spline families.

use super::cost::cost_report;
use crate::network::{Activation, ArchSpec, LayerSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Mlp,
    Lcn,
    Kan,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Mlp, Family::Lcn, Family::Kan];

    pub fn name(self) -> &'static str {
        match self {
            Family::Mlp => "mlp",
            Family::Lcn => "lcn",
            Family::Kan => "kan",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BudgetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlp" => Ok(Family::Mlp),
            "lcn" => Ok(Family::Lcn),
            "kan" | "kan_edge" => Ok(Family::Kan),
            other => Err(BudgetError::UnknownFamily(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("unknown model family '{0}' (expected mlp, lcn or kan)")]
    UnknownFamily(String),
    #[error("no {family} configuration within {tolerance:.1}% of {budget} parameters")]
    Unreachable {
        family: Family,
        budget: usize,
        tolerance: f64,
    },
    #[error("budget {budget}: best parameter spread across families is {spread:.2}%, limit {limit:.1}%")]
    Spread { budget: usize, spread: f64, limit: f64 },
}

/// Search space for the builder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetOptions {
    /// Number of hidden layers.
    pub depth: usize,
    pub activation: Activation,
    pub degree: usize,
    pub domain: (f64, f64),
    pub max_width: usize,
    /// Inclusive `N` range for LCN layers.
    pub lcn_basis: (usize, usize),
    /// Inclusive `N` range for KAN layers.
    pub kan_basis: (usize, usize),
    /// Candidates may sit this far (as a fraction) from the requested budget.
    pub window: f64,
    /// Maximum `(max - min) / min` across the matched families.
    pub max_spread: f64,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self {
            depth: 1,
            activation: Activation::Relu,
            degree: 3,
            domain: crate::network::DEFAULT_KNOT_DOMAIN,
            max_width: 512,
            lcn_basis: (4, 32),
            kan_basis: (4, 12),
            window: 0.05,
            max_spread: 0.02,
        }
    }
}

/// A built configuration and its exact parameter count.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub family: Family,
    pub arch: ArchSpec,
    pub params: usize,
}

fn layer(family: Family, width: usize, n: usize, opts: &BudgetOptions) -> LayerSpec {
    match family {
        Family::Mlp => LayerSpec::mlp(width, opts.activation),
        Family::Lcn => LayerSpec::Lcn {
            width,
            num_basis: n,
            degree: opts.degree,
            domain: opts.domain,
        },
        Family::Kan => LayerSpec::KanEdge {
            width,
            num_basis: n,
            degree: opts.degree,
            domain: opts.domain,
        },
    }
}

/// Every configuration of `family` whose parameter count lies within the
/// window around `budget`, closest first.
pub fn candidates(
    family: Family,
    input_dim: usize,
    output_dim: usize,
    budget: usize,
    opts: &BudgetOptions,
) -> Vec<Candidate> {
    let basis: Vec<usize> = match family {
        Family::Mlp => vec![0],
        Family::Lcn => (opts.lcn_basis.0.max(opts.degree + 1)..=opts.lcn_basis.1).collect(),
        Family::Kan => (opts.kan_basis.0.max(opts.degree + 1)..=opts.kan_basis.1).collect(),
    };
    let lo = budget as f64 * (1.0 - opts.window);
    let hi = budget as f64 * (1.0 + opts.window);
    let mut out = Vec::new();
    for &n in &basis {
        for width in 1..=opts.max_width {
            let arch = ArchSpec::new(
                input_dim,
                vec![layer(family, width, n, opts); opts.depth],
                output_dim,
            );
            let params = cost_report(&arch).params;
            if params as f64 > hi {
                // parameter count grows with width
                break;
            }
            if params as f64 >= lo {
                out.push(Candidate {
                    family,
                    arch,
                    params,
                });
            }
        }
    }
    out.sort_by_key(|c| (c.params.abs_diff(budget), c.params));
    out
}

/// The configuration of `family` closest to `budget`.
pub fn match_params(
    family: Family,
    input_dim: usize,
    output_dim: usize,
    budget: usize,
    opts: &BudgetOptions,
) -> Result<Candidate, BudgetError> {
    candidates(family, input_dim, output_dim, budget, opts)
        .into_iter()
        .next()
        .ok_or(BudgetError::Unreachable {
            family,
            budget,
            tolerance: opts.window * 100.0,
        })
}

/// `(max - min) / min` over parameter counts.
pub fn param_spread(counts: &[usize]) -> f64 {
    let (Some(&min), Some(&max)) = (counts.iter().min(), counts.iter().max()) else {
        return 0.0;
    };
    (max - min) as f64 / min as f64
}

/// One configuration per family, chosen to minimize the parameter spread
/// (ties broken by total distance to the budget).
pub fn matched_configs(
    families: &[Family],
    input_dim: usize,
    output_dim: usize,
    budget: usize,
    opts: &BudgetOptions,
) -> Result<Vec<Candidate>, BudgetError> {
    const KEEP: usize = 24;
    let mut pools = Vec::with_capacity(families.len());
    for &family in families {
        let mut pool = candidates(family, input_dim, output_dim, budget, opts);
        if pool.is_empty() {
            return Err(BudgetError::Unreachable {
                family,
                budget,
                tolerance: opts.window * 100.0,
            });
        }
        pool.truncate(KEEP);
        pools.push(pool);
    }

    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    let mut pick = vec![0usize; pools.len()];
    loop {
        let counts: Vec<usize> = pick.iter().zip(&pools).map(|(&i, p)| p[i].params).collect();
        let spread = param_spread(&counts);
        let distance: usize = counts.iter().map(|c| c.abs_diff(budget)).sum();
        if best
            .as_ref()
            .is_none_or(|(s, d, _)| (spread, distance) < (*s, *d))
        {
            best = Some((spread, distance, pick.clone()));
        }
        // odometer over the pools
        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < pools[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
    }
    let (spread, _, pick) = best.expect("pools are non-empty");
    if spread >= opts.max_spread {
        return Err(BudgetError::Spread {
            budget,
            spread: spread * 100.0,
            limit: opts.max_spread * 100.0,
        });
    }
    Ok(pick
        .into_iter()
        .zip(pools)
        .map(|(i, mut p)| p.swap_remove(i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlp_matches_small_lcn_exactly() {
        // LCN width 8, N = 16 on 2 inputs: 16 + 8 + 128 + 9 = 161 = MLP width 40
        let lcn = ArchSpec::new(2, vec![LayerSpec::lcn(8, 16, 3)], 1);
        let target = cost_report(&lcn).params;
        assert_eq!(target, 161);
        let mlp = match_params(Family::Mlp, 2, 1, target, &BudgetOptions::default()).unwrap();
        assert_eq!(mlp.params, 161);
        assert_eq!(mlp.arch.hidden[0].width(), 40);
    }

    #[test]
    fn matched_families_within_two_percent() {
        let opts = BudgetOptions::default();
        for (d, o, budget) in [(784, 10, 25_000), (784, 10, 12_000), (16, 2, 2_000), (4, 3, 500)] {
            let picks = matched_configs(&Family::ALL, d, o, budget, &opts).unwrap();
            let counts: Vec<usize> = picks.iter().map(|c| c.params).collect();
            assert!(param_spread(&counts) < 0.02, "{budget}: {counts:?}");
            for c in &picks {
                assert_eq!(cost_report(&c.arch).params, c.params);
            }
        }
    }

    #[test]
    fn kan_costs_more_flops_than_lcn_at_equal_budget() {
        let opts = BudgetOptions::default();
        for budget in [2_000, 5_000, 25_000] {
            let picks = matched_configs(&[Family::Lcn, Family::Kan], 784, 10, budget, &opts);
            let Ok(picks) = picks else { continue };
            let lcn = cost_report(&picks[0].arch).flops;
            let kan = cost_report(&picks[1].arch).flops;
            assert!(kan >= lcn, "{budget}: kan {kan} < lcn {lcn}");
        }
    }

    #[test]
    fn unreachable_budget_is_reported() {
        // a 784 -> 10 net cannot have fewer parameters than its output layer
        let err = match_params(Family::Mlp, 784, 10, 100, &BudgetOptions::default()).unwrap_err();
        assert!(matches!(err, BudgetError::Unreachable { family: Family::Mlp, .. }));
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("cnn".parse::<Family>().is_err());
    }
}
