//! B-spline basis evaluation over knot vectors.
//!
//! Basis functions follow the Cox–de Boor recursion: degree-0 functions are
//! indicators of half-open knot intervals, and higher degrees blend two
//! neighbouring lower-degree functions. Any `0/0` term produced by repeated
//! knots is defined as zero. The last non-empty interval is closed at the
//! right end so the whole domain `[lo, hi]` is covered.
//!
//! Two evaluation paths exist and are kept bit-compatible:
//!
//! - [`eval_basis`] computes a single `B_{p,n}(x)` from its own triangle.
//! - [`eval_nonzero_basis`] computes the `p + 1` functions that can be
//!   non-zero at `x` in one pass.
//!
//! Both use the same node formula in the same order, so expanding a
//! [`BasisSupport`] with zeros reproduces `eval_basis` exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("knot domain [{lo}, {hi}] is empty, inverted or not finite")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("{num_basis} basis functions cannot support degree {degree} (need at least {})", degree + 1)]
    TooFewBasis { num_basis: usize, degree: usize },
    #[error("knot sequence is not non-decreasing or contains non-finite values")]
    InvalidKnots,
    #[error("knot sequence of length {len} is too short for degree {degree}")]
    TooFewKnots { len: usize, degree: usize },
    #[error("x = {x} lies outside the knot domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("basis index {index} out of range (num_basis = {num_basis})")]
    IndexOutOfRange { index: usize, num_basis: usize },
    #[error("derivative requested for a degree-0 basis")]
    DegreeZeroDerivative,
    #[error("expected {expected} spline coefficients, got {got}")]
    CoefficientLength { expected: usize, got: usize },
    #[error("x = {x} has fewer than p + 1 basis functions defined around it")]
    IncompleteSupport { x: f64 },
}

/// A non-decreasing knot sequence for one spline family.
///
/// `knots.len() == num_basis + degree + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
    num_basis: usize,
    lo: f64,
    hi: f64,
}

/// The `p + 1` basis values that can be non-zero at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSupport {
    /// Index of the basis function that `values[0]` belongs to.
    pub first_index: usize,
    pub values: Vec<f64>,
}

impl BasisSupport {
    /// Index range of the active basis functions.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.first_index..self.first_index + self.values.len()
    }

    /// Value of basis `n` at the point this support was computed for.
    pub fn value(&self, n: usize) -> f64 {
        if self.indices().contains(&n) {
            self.values[n - self.first_index]
        } else {
            0.0
        }
    }

    /// Expands into a dense vector of `num_basis` values.
    pub fn expand(&self, num_basis: usize) -> Vec<f64> {
        let mut dense = vec![0.0; num_basis];
        for (k, v) in self.values.iter().enumerate() {
            dense[self.first_index + k] = *v;
        }
        dense
    }

    /// `sum_n coeffs[n] * B_n` over the active indices only.
    pub fn combine(&self, coeffs: &[f64]) -> f64 {
        let active = &coeffs[self.indices()];
        active.iter().zip(&self.values).map(|(c, b)| c * b).sum()
    }
}

impl KnotVector {
    /// Clamped uniform knots: `lo` and `hi` each repeated `degree + 1` times,
    /// with `num_basis - degree - 1` uniformly spaced interior knots.
    pub fn clamped_uniform(
        lo: f64,
        hi: f64,
        num_basis: usize,
        degree: usize,
    ) -> Result<Self, SplineError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SplineError::InvalidDomain { lo, hi });
        }
        if num_basis < degree + 1 {
            return Err(SplineError::TooFewBasis { num_basis, degree });
        }
        let intervals = num_basis - degree;
        let mut knots = Vec::with_capacity(num_basis + degree + 1);
        knots.extend(std::iter::repeat_n(lo, degree + 1));
        for j in 1..intervals {
            knots.push(lo + (hi - lo) * (j as f64 / intervals as f64));
        }
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        Ok(Self {
            knots,
            degree,
            num_basis,
            lo,
            hi,
        })
    }

    /// Arbitrary (possibly unclamped) knots. The domain spans the first to
    /// the last knot.
    pub fn from_knots(knots: Vec<f64>, degree: usize) -> Result<Self, SplineError> {
        if knots.len() < degree + 2 {
            return Err(SplineError::TooFewKnots {
                len: knots.len(),
                degree,
            });
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(SplineError::InvalidKnots);
        }
        let lo = knots[0];
        let hi = knots[knots.len() - 1];
        if lo >= hi {
            return Err(SplineError::InvalidDomain { lo, hi });
        }
        let num_basis = knots.len() - degree - 1;
        Ok(Self {
            knots,
            degree,
            num_basis,
            lo,
            hi,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Nearest in-domain point. NaN is passed through.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    fn check_domain(&self, x: f64) -> Result<(), SplineError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(SplineError::OutOfDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Index `s` of the last non-empty knot interval.
    fn last_span(&self) -> usize {
        (0..self.knots.len() - 1)
            .rev()
            .find(|&s| self.knots[s] < self.knots[s + 1])
            .expect("domain is non-empty")
    }
}

/// Equivalent to [`KnotVector::clamped_uniform`].
pub fn make_knot_vector(
    domain_lo: f64,
    domain_hi: f64,
    num_basis: usize,
    degree: usize,
) -> Result<KnotVector, SplineError> {
    KnotVector::clamped_uniform(domain_lo, domain_hi, num_basis, degree)
}

/// Index `s` with `knots[s] <= x < knots[s + 1]`; `x == hi` maps to the last
/// non-empty interval.
pub fn find_span(kv: &KnotVector, x: f64) -> Result<usize, SplineError> {
    kv.check_domain(x)?;
    if x == kv.hi {
        return Ok(kv.last_span());
    }
    // knots[0] <= x < hi guarantees at least one knot <= x and one > x.
    Ok(kv.knots.partition_point(|k| *k <= x) - 1)
}

/// One node of the Cox–de Boor triangle: `B_{k,j}(x)` from `B_{k-1,j}` and
/// `B_{k-1,j+1}`. Zero denominators contribute zero.
#[inline]
fn blend(knots: &[f64], k: usize, j: usize, x: f64, left: f64, right: f64) -> f64 {
    let mut value = 0.0;
    let d1 = knots[j + k] - knots[j];
    if d1 != 0.0 {
        value += (x - knots[j]) / d1 * left;
    }
    let d2 = knots[j + k + 1] - knots[j + 1];
    if d2 != 0.0 {
        value += (knots[j + k + 1] - x) / d2 * right;
    }
    value
}

/// `B_{degree,n}(x)` given the span of `x`. Index `n` may reach
/// `knots.len() - degree - 2`.
fn basis_at_degree(knots: &[f64], degree: usize, n: usize, span: usize, x: f64) -> f64 {
    // row[j - n] holds B_{k, j} for j in n..=n+degree-k
    let mut row: Vec<f64> = (n..=n + degree)
        .map(|j| if j == span { 1.0 } else { 0.0 })
        .collect();
    for k in 1..=degree {
        for t in 0..=degree - k {
            row[t] = blend(knots, k, n + t, x, row[t], row[t + 1]);
        }
    }
    row[0]
}

/// `B_{p,n}(x)` via the Cox–de Boor recursion.
pub fn eval_basis(kv: &KnotVector, n: usize, x: f64) -> Result<f64, SplineError> {
    if n >= kv.num_basis {
        return Err(SplineError::IndexOutOfRange {
            index: n,
            num_basis: kv.num_basis,
        });
    }
    let span = find_span(kv, x)?;
    Ok(basis_at_degree(&kv.knots, kv.degree, n, span, x))
}

/// `dB_{p,n}/dx` via `p * (B_{p-1,n} / (k[n+p] - k[n]) - B_{p-1,n+1} / (k[n+p+1] - k[n+1]))`.
///
/// At knots this is the right derivative, except at `hi` where it is the
/// left derivative.
pub fn eval_basis_derivative(kv: &KnotVector, n: usize, x: f64) -> Result<f64, SplineError> {
    if kv.degree == 0 {
        return Err(SplineError::DegreeZeroDerivative);
    }
    if n >= kv.num_basis {
        return Err(SplineError::IndexOutOfRange {
            index: n,
            num_basis: kv.num_basis,
        });
    }
    let span = find_span(kv, x)?;
    let p = kv.degree;
    let lower_left = basis_at_degree(&kv.knots, p - 1, n, span, x);
    let lower_right = basis_at_degree(&kv.knots, p - 1, n + 1, span, x);
    Ok(derivative_terms(&kv.knots, p, n, lower_left, lower_right))
}

#[inline]
fn derivative_terms(knots: &[f64], p: usize, n: usize, lower_left: f64, lower_right: f64) -> f64 {
    let mut d = 0.0;
    let d1 = knots[n + p] - knots[n];
    if d1 != 0.0 {
        d += lower_left / d1;
    }
    let d2 = knots[n + p + 1] - knots[n + 1];
    if d2 != 0.0 {
        d -= lower_right / d2;
    }
    p as f64 * d
}

/// Fills `row[t] = B_{level, span - level + t}` for `t in 0..=level`.
fn nonzero_triangle(knots: &[f64], span: usize, level: usize, x: f64) -> Vec<f64> {
    // Indices below span - k at level k are zero; keep the padding explicit so
    // each node sees exactly the operands eval_basis would.
    let mut row = vec![0.0; level + 1];
    row[level] = 1.0; // B_{0, span}
    for k in 1..=level {
        // after this pass row[level - k + t] = B_{k, span - k + t}
        for t in 0..=k {
            let j = span - k + t;
            let idx = level - k + t;
            let left = row[idx];
            let right = if t < k { row[idx + 1] } else { 0.0 };
            row[idx] = blend(knots, k, j, x, left, right);
        }
    }
    row
}

fn checked_span_for_support(kv: &KnotVector, x: f64) -> Result<usize, SplineError> {
    let span = find_span(kv, x)?;
    if span < kv.degree || span >= kv.num_basis {
        return Err(SplineError::IncompleteSupport { x });
    }
    Ok(span)
}

/// The `p + 1` basis values that can be non-zero at `x`.
pub fn eval_nonzero_basis(kv: &KnotVector, x: f64) -> Result<BasisSupport, SplineError> {
    let span = checked_span_for_support(kv, x)?;
    let values = nonzero_triangle(&kv.knots, span, kv.degree, x);
    Ok(BasisSupport {
        first_index: span - kv.degree,
        values,
    })
}

/// Values and derivatives of the active basis functions at `x`.
///
/// Derivatives are bit-identical to [`eval_basis_derivative`].
pub fn eval_nonzero_basis_with_derivatives(
    kv: &KnotVector,
    x: f64,
) -> Result<(BasisSupport, Vec<f64>), SplineError> {
    if kv.degree == 0 {
        return Err(SplineError::DegreeZeroDerivative);
    }
    let span = checked_span_for_support(kv, x)?;
    let p = kv.degree;
    let values = nonzero_triangle(&kv.knots, span, p, x);
    // lower[t] = B_{p-1, span - p + 1 + t}, t in 0..p
    let lower = nonzero_triangle(&kv.knots, span, p - 1, x);
    let first = span - p;
    let derivs = (0..=p)
        .map(|t| {
            let n = first + t;
            let lower_left = if t >= 1 { lower[t - 1] } else { 0.0 };
            let lower_right = if t < p { lower[t] } else { 0.0 };
            derivative_terms(&kv.knots, p, n, lower_left, lower_right)
        })
        .collect();
    Ok((
        BasisSupport {
            first_index: first,
            values,
        },
        derivs,
    ))
}

/// `S(x) = sum_n coeffs[n] * B_{p,n}(x)`, using only the `p + 1` active terms.
pub fn eval_spline(coeffs: &[f64], kv: &KnotVector, x: f64) -> Result<f64, SplineError> {
    if coeffs.len() != kv.num_basis {
        return Err(SplineError::CoefficientLength {
            expected: kv.num_basis,
            got: coeffs.len(),
        });
    }
    Ok(eval_nonzero_basis(kv, x)?.combine(coeffs))
}

/// `S'(x)` over the active support. Zero for degree 0.
pub fn eval_spline_derivative(coeffs: &[f64], kv: &KnotVector, x: f64) -> Result<f64, SplineError> {
    if coeffs.len() != kv.num_basis {
        return Err(SplineError::CoefficientLength {
            expected: kv.num_basis,
            got: coeffs.len(),
        });
    }
    if kv.degree == 0 {
        kv.check_domain(x)?;
        return Ok(0.0);
    }
    let (support, derivs) = eval_nonzero_basis_with_derivatives(kv, x)?;
    Ok(coeffs[support.indices()]
        .iter()
        .zip(&derivs)
        .map(|(c, d)| c * d)
        .sum())
}
