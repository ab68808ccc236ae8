//! Pairwise independent, identically distributed sequences whose standardized
//! mean converges to `S = √(1−r²) Z + r χ` instead of a Gaussian.
//!
//! The crate builds the sequence from categorical labels, evaluates the limit
//! law `S` (pdf, cdf, quantile, characteristic function, sampler), and
//! provides the exact and Monte-Carlo checks tying the two together.
//!
//! Everything numeric is generic over [`scalar::Real`]; the `*64` aliases
//! below fix the scalar to `f64`.

pub mod cli;
pub mod construction;
pub mod limitlaw;
pub mod margins;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod scalar;
pub mod special;
pub mod statistics;

pub use scalar::Real;

pub type MarginSpec64 = margins::MarginSpec<f64>;
pub type SplitMargin64 = margins::SplitMargin<f64>;
pub type LimitLaw64 = limitlaw::LimitLaw<f64>;
