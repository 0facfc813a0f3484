//! Double-double numbers: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

pub(crate) const LN_2: Dd = Dd {
    hi: 6.931471805599452862e-1,
    lo: 2.319046813846299558e-17,
};

#[cfg(test)]
pub(crate) const E: Dd = Dd {
    hi: 2.718281828459045091,
    lo: 1.445646891729250158e-16,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub(crate) fn hi(self) -> f64 {
        self.hi
    }

    #[cfg(test)]
    pub(crate) fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl<T: Into<Dd>> Add<T> for Dd {
    type Output = Dd;

    fn add(self, rhs: T) -> Dd {
        let b = rhs.into();
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl<T: Into<Dd>> AddAssign<T> for Dd {
    fn add_assign(&mut self, rhs: T) {
        *self = *self + rhs;
    }
}

impl<T: Into<Dd>> Sub<T> for Dd {
    type Output = Dd;

    fn sub(self, rhs: T) -> Dd {
        self + (-rhs.into())
    }
}

impl<T: Into<Dd>> Mul<T> for Dd {
    type Output = Dd;

    fn mul(self, rhs: T) -> Dd {
        let b = rhs.into();
        let (p1, p2) = two_prod(self.hi, b.hi);
        Dd::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl<T: Into<Dd>> Div<T> for Dd {
    type Output = Dd;

    fn div(self, rhs: T) -> Dd {
        let b = rhs.into();
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        Dd::renorm(q1, q2) + q3
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, other: &f64) -> bool {
        *self == Dd::from(*other)
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from(*other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_keeps_the_low_word() {
        let third = Dd::from(1.0) / 3.0;
        assert!((third * 3.0 - 1.0).abs() < 1e-32);
        let x = Dd::from(0.1) + 1e-18;
        let y = Dd::from(0.7) + 3e-19;
        assert!(((x / y) * y - x).abs() < 1e-32);
        // (1 + 2^-60)^2 = 1 + 2^-59 + 2^-120
        let a = Dd::from(1.0) + 2f64.powi(-60);
        let sq = a * a;
        assert_eq!(sq.hi, 1.0);
        assert_eq!(sq.lo, 2f64.powi(-59) + 2f64.powi(-120));
        assert!((Dd::from(1e16) + 1.0 - 1e16) == 1.0);
    }

    #[test]
    fn ordering_uses_both_words() {
        let a = Dd::from(1.0);
        let b = a + 1e-20;
        assert!(b > a && a < b && b > 1.0);
        assert!(-b < -a);
    }
}
