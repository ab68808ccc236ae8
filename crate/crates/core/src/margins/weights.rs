//! The moment conditions a label distribution must satisfy for the pair
//! indicators to be identically distributed and pairwise independent:
//! `Σp = 1`, `Σp² = w`, `Σp³ = w²`. Only the uniform vector solves all three.

use num_traits::{FromPrimitive, Num, Signed};
use serde::Serialize;

/// Residuals of the three conditions for one probability vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport<T> {
    /// `Σp − 1`, `Σp² − w`, `Σp³ − w²`.
    pub residuals: [T; 3],
    pub holds: [bool; 3],
    /// Every `p_i` lies in the open unit interval.
    pub valid_input: bool,
}

impl<T> ConditionReport<T> {
    pub fn all_hold(&self) -> bool {
        self.valid_input && self.holds.iter().all(|&h| h)
    }
}

/// Evaluates the three conditions with the default tolerance `1e-12`.
///
/// Generic over any signed field, so rational inputs give exact residuals.
pub fn check_weight_conditions<T>(p: &[T], w: T) -> ConditionReport<T>
where
    T: Clone + Num + Signed + PartialOrd + FromPrimitive,
{
    let tol = T::from_f64(1e-12).expect("tolerance representable");
    check_weight_conditions_with(p, w, tol)
}

pub fn check_weight_conditions_with<T>(p: &[T], w: T, tol: T) -> ConditionReport<T>
where
    T: Clone + Num + Signed + PartialOrd + FromPrimitive,
{
    let valid_input = !p.is_empty() && p.iter().all(|x| *x > T::zero() && *x < T::one());
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    for x in p {
        let sq = x.clone() * x.clone();
        s1 = s1 + x.clone();
        s3 = s3 + sq.clone() * x.clone();
        s2 = s2 + sq;
    }
    let residuals = [s1 - T::one(), s2 - w.clone(), s3 - w.clone() * w];
    let holds = [
        residuals[0].abs() <= tol,
        residuals[1].abs() <= tol,
        residuals[2].abs() <= tol,
    ];
    ConditionReport {
        residuals,
        holds,
        valid_input,
    }
}
