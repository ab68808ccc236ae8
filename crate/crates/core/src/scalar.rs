//! The floating-point scalar abstraction shared by every numerical module.
//!
//! All distribution math is written against [`Real`]. Special functions and
//! variate generators are routed through the trait so that `f32` and `f64`
//! can share one implementation; `f32` evaluates special functions in `f64`
//! and rounds the result.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Open01, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Chi-squared sampler with a fixed number of degrees of freedom.
    type ChiSquared: Distribution<Self> + Clone + Debug + Send + Sync;

    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values, which never happens for the provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn erf(self) -> Self;
    fn erfc(self) -> Self;
    fn ln_gamma(self) -> Self;
    /// Regularized lower incomplete gamma P(a, x).
    fn gamma_p(a: Self, x: Self) -> Self;
    /// Regularized upper incomplete gamma Q(a, x).
    fn gamma_q(a: Self, x: Self) -> Self;
    /// Inverse of the complementary error function on (0, 2).
    fn erfc_inv(self) -> Self;

    fn chi_squared(dof: Self) -> Self::ChiSquared;
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Uniform draw on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Tolerance floor for identities that hold exactly in real arithmetic.
    #[inline]
    fn identity_tol(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(100.0))
    }
}

impl Real for f64 {
    type ChiSquared = ChiSquared<f64>;

    fn erf(self) -> Self {
        libm::erf(self)
    }
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }
    fn gamma_p(a: Self, x: Self) -> Self {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        statrs::function::gamma::gamma_lr(a, x)
    }
    fn gamma_q(a: Self, x: Self) -> Self {
        if x <= 0.0 {
            return 1.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        statrs::function::gamma::gamma_ur(a, x)
    }
    fn erfc_inv(self) -> Self {
        statrs::function::erf::erfc_inv(self)
    }

    fn chi_squared(dof: Self) -> Self::ChiSquared {
        ChiSquared::new(dof).expect("positive degrees of freedom")
    }
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    #[inline]
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(Open01)
    }
}

impl Real for f32 {
    type ChiSquared = ChiSquared<f32>;

    fn erf(self) -> Self {
        libm::erf(self as f64) as f32
    }
    fn erfc(self) -> Self {
        libm::erfc(self as f64) as f32
    }
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }
    fn gamma_p(a: Self, x: Self) -> Self {
        <f64 as Real>::gamma_p(a as f64, x as f64) as f32
    }
    fn gamma_q(a: Self, x: Self) -> Self {
        <f64 as Real>::gamma_q(a as f64, x as f64) as f32
    }
    fn erfc_inv(self) -> Self {
        statrs::function::erf::erfc_inv(self as f64) as f32
    }

    fn chi_squared(dof: Self) -> Self::ChiSquared {
        ChiSquared::new(dof).expect("positive degrees of freedom")
    }
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    #[inline]
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(Open01)
    }
}
