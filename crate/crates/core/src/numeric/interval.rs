use std::fmt;

use serde::{Deserialize, Serialize};

use super::scalar::Real;
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` holding a certified two-sided estimate.
///
/// Both ends are finite unless the interval was built with
/// [`RealInterval::unbounded_above`], in which case `hi = +inf`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealInterval<T: Real> {
    lo: T,
    hi: T,
}

impl<T: Real> fmt::Debug for RealInterval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: Real> RealInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Degenerate(format!("non-finite interval [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(Error::Degenerate(format!("inverted interval [{lo}, {hi}]")));
        }
        Ok(RealInterval { lo, hi })
    }

    pub fn point(x: T) -> Self {
        RealInterval { lo: x, hi: x }
    }

    pub fn unbounded_above(lo: T) -> Self {
        RealInterval { lo, hi: T::infinity() }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        if self.is_bounded() {
            (self.lo + self.hi) / T::lit(2.0)
        } else {
            T::infinity()
        }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Tightest interval containing both.
    pub fn hull(&self, other: &Self) -> Self {
        RealInterval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(RealInterval { lo, hi })
    }

    /// Multiplication by a nonnegative factor.
    pub fn scale(&self, c: T) -> Self {
        debug_assert!(c >= T::zero());
        RealInterval { lo: self.lo * c, hi: self.hi * c }
    }

    pub fn add(&self, other: &Self) -> Self {
        RealInterval { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }

    /// `{1/x : x in self}` for a positive interval; `lo = 0` maps to an
    /// interval unbounded above.
    pub fn recip(&self) -> Result<Self> {
        if self.lo < T::zero() {
            return Err(Error::Degenerate("reciprocal of an interval containing negatives".into()));
        }
        if self.hi == T::zero() {
            return Err(Error::Degenerate("reciprocal of zero".into()));
        }
        let lo = if self.hi.is_finite() { T::one() / self.hi } else { T::zero() };
        if self.lo == T::zero() {
            Ok(RealInterval::unbounded_above(lo))
        } else {
            Ok(RealInterval { lo, hi: T::one() / self.lo })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        assert!(RealInterval::new(1.0, 0.5).is_err());
        assert!(RealInterval::new(0.0, f64::INFINITY).is_err());
        let u = RealInterval::unbounded_above(2.0f64);
        assert!(!u.is_bounded());
        assert!(u.contains(1e300));
    }

    #[test]
    fn recip_bracket() {
        let i = RealInterval::new(0.5, 2.0).unwrap();
        let r = i.recip().unwrap();
        assert_eq!((r.lo(), r.hi()), (0.5, 2.0));
        let z = RealInterval::new(0.0, 4.0).unwrap().recip().unwrap();
        assert_eq!(z.lo(), 0.25);
        assert!(!z.is_bounded());
    }

    #[test]
    fn hull_and_intersect() {
        let a = RealInterval::new(0.0, 1.0).unwrap();
        let b = RealInterval::new(0.5, 3.0f32).unwrap();
        assert_eq!(a.hull(&b), RealInterval::new(0.0, 3.0).unwrap());
        assert_eq!(a.intersect(&b), Some(RealInterval::new(0.5, 1.0).unwrap()));
        assert!(a.intersect(&RealInterval::point(2.0)).is_none());
    }
}
