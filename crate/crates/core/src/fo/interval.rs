use num_traits::Zero;

use crate::num::{monus, Rational};

/// A non-empty range `[lo, hi]` of non-negative reals; `hi = None` is unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Option<Rational>,
}

impl Interval {
    pub fn nonneg() -> Interval {
        Interval { lo: Rational::zero(), hi: None }
    }

    pub fn point(q: Rational) -> Interval {
        Interval { lo: q.clone(), hi: Some(q) }
    }

    pub fn new(lo: Rational, hi: Rational) -> Interval {
        Interval { lo, hi: Some(hi) }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: self.hi.as_ref().zip(o.hi.as_ref()).map(|(a, b)| a + b) }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let hi = match (&self.hi, &o.hi) {
            (Some(a), Some(b)) => Some(a * b),
            // An unbounded factor times something pinned at zero stays zero.
            (None, Some(b)) if b.is_zero() => Some(Rational::zero()),
            (Some(a), None) if a.is_zero() => Some(Rational::zero()),
            _ => None,
        };
        Interval { lo: &self.lo * &o.lo, hi }
    }

    pub fn monus(&self, o: &Interval) -> Interval {
        let lo = match &o.hi {
            Some(h) => monus(&self.lo, h),
            None => Rational::zero(),
        };
        Interval { lo, hi: self.hi.as_ref().map(|h| monus(h, &o.lo)) }
    }

    pub fn join(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.as_ref().zip(o.hi.as_ref()).map(|(a, b)| a.clone().max(b.clone())),
        }
    }

    /// Every value of `self` is strictly below every value of `o`.
    pub fn strictly_below(&self, o: &Interval) -> bool {
        self.hi.as_ref().is_some_and(|h| *h < o.lo)
    }

    /// Every value of `self` is at most every value of `o`.
    pub fn below(&self, o: &Interval) -> bool {
        self.hi.as_ref().is_some_and(|h| *h <= o.lo)
    }

    pub fn as_point(&self) -> Option<&Rational> {
        self.hi.as_ref().filter(|h| **h == self.lo)
    }
}
