use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A half-open interval `[lo, hi)`. When `lo == hi` it denotes the single
/// point `{lo}`, which is how finite point sets are encoded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        if self.is_point() {
            x == self.lo
        } else {
            self.lo <= x && x < self.hi
        }
    }
}

/// A finite union of [`Interval`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "T: Real")]
pub struct IntervalSet<T> {
    pub intervals: Vec<Interval<T>>,
}

impl<T: Real> IntervalSet<T> {
    pub fn new(intervals: Vec<Interval<T>>) -> Self {
        Self { intervals }
    }

    pub fn single(lo: T, hi: T) -> Self {
        Self::new(vec![Interval::new(lo, hi)])
    }

    pub fn points(xs: &[T]) -> Self {
        Self::new(xs.iter().map(|&x| Interval::point(x)).collect())
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Finite interval endpoints, for use as quadrature breakpoints.
    pub fn endpoints(&self) -> Vec<T> {
        self.intervals
            .iter()
            .flat_map(|i| [i.lo, i.hi])
            .filter(|x| x.is_finite())
            .collect()
    }

    /// Image of the set under `x -> a x + b` with `a > 0`.
    pub fn affine(&self, a: T, b: T) -> Self {
        Self::new(
            self.intervals
                .iter()
                .map(|i| Interval::new(a * i.lo + b, a * i.hi + b))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_membership() {
        let s = IntervalSet::single(0.0f64, 1.0);
        assert!(s.contains(0.0));
        assert!(s.contains(0.999));
        assert!(!s.contains(1.0));
        assert!(!s.contains(-1e-300));
    }

    #[test]
    fn points_are_singletons() {
        let s = IntervalSet::points(&[-1.0f64, 1.0]);
        assert!(s.contains(-1.0) && s.contains(1.0));
        assert!(!s.contains(0.0) && !s.contains(2.0));
    }

    #[test]
    fn json_shape() {
        let s = IntervalSet::new(vec![Interval::new(0.0f64, f64::INFINITY)]);
        let json = serde_json::to_string(&IntervalSet::points(&[1.0f64])).unwrap();
        assert_eq!(json, r#"[{"lo":1.0,"hi":1.0}]"#);
        assert!(s.contains(1e300));
    }
}
