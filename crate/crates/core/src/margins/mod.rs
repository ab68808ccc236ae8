//! Margins admissible for the construction, their split into the laws off
//! and on the set `A`, and the shape parameter `r`.
//!
//! A margin `F` qualifies when it has finite variance and a set `A` with
//! `P(W ∈ A) = 1/ℓ` for an integer `ℓ ≥ 2`. Splitting it yields `U = W | A^c`
//! and `V = W | A`, whose means drive the limit law through
//! `r = √(ℓ⁻¹(1−ℓ⁻¹)) (μ_V − μ_U) / σ`.

mod builtin;
mod custom;
mod parse;
mod set;
mod weights;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::special::{normal_cdf, normal_quantile, normal_sf};

pub use set::{Interval, IntervalSet};
pub use weights::{check_weight_conditions, check_weight_conditions_with, ConditionReport};

/// Tolerance on `|P(W ∈ A) − 1/ℓ|` for numerically specified margins.
pub const TAU_A: f64 = 1e-9;
/// Tolerance under which `μ_U = μ_V` is reported as the `r = 0` case.
pub const TAU_EQ: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarginError {
    #[error("invalid margin parameter: {0}")]
    InvalidParameter(String),
    #[error("P(W in A) = {prob_a} is not 1/ell = {target}")]
    NonIntegerReciprocal { prob_a: f64, target: f64 },
    #[error("margin has zero variance")]
    ZeroVariance,
    #[error("margin variance is not finite")]
    InfiniteVariance,
    #[error("cannot parse margin: {0}")]
    Parse(String),
}

/// A probability atom `P(W = x) = p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Atom<T> {
    pub x: T,
    pub p: T,
}

pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type VariateFn<T> = Arc<dyn Fn(&mut dyn RngCore) -> T + Send + Sync>;

/// Density or mass function of a user supplied margin.
#[derive(Clone)]
pub enum CustomLaw<T> {
    /// Density supported on `[support.0, support.1]` (ends may be infinite).
    Density { pdf: DensityFn<T>, support: (T, T) },
    Mass(Vec<Atom<T>>),
}

/// A margin defined programmatically. Not serializable.
#[derive(Clone)]
pub struct CustomMargin<T> {
    pub law: CustomLaw<T>,
    /// Draws `W ~ F`; the conditional laws are sampled by rejection from it.
    pub sampler: VariateFn<T>,
    pub set: IntervalSet<T>,
    pub ell: u32,
}

impl<T: Real> CustomMargin<T> {
    /// The margin of `a W + b` (`a > 0`) with the set `A` mapped alongside.
    pub fn affine(&self, a: T, b: T) -> Self {
        let law = match &self.law {
            CustomLaw::Density { pdf, support } => {
                let pdf = pdf.clone();
                CustomLaw::Density {
                    pdf: Arc::new(move |y: T| pdf((y - b) / a) / a),
                    support: (a * support.0 + b, a * support.1 + b),
                }
            }
            CustomLaw::Mass(atoms) => CustomLaw::Mass(
                atoms
                    .iter()
                    .map(|at| Atom { x: a * at.x + b, p: at.p })
                    .collect(),
            ),
        };
        let sampler = self.sampler.clone();
        CustomMargin {
            law,
            sampler: Arc::new(move |rng: &mut dyn RngCore| a * sampler(rng) + b),
            set: self.set.affine(a, b),
            ell: self.ell,
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for CustomMargin<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let law = match &self.law {
            CustomLaw::Density { support, .. } => format!("Density(support={support:?})"),
            CustomLaw::Mass(atoms) => format!("Mass({atoms:?})"),
        };
        f.debug_struct("CustomMargin")
            .field("law", &law)
            .field("set", &self.set)
            .field("ell", &self.ell)
            .finish()
    }
}

/// Declarative description of a margin together with its set `A` and `ℓ`.
///
/// Serialized as `{"kind": "...", "params": {...}}`. The `Custom` variant
/// holds closures and is rejected by the serializer.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", bound = "T: Real")]
pub enum MarginSpec<T> {
    /// `P(W = 1) = 1/ℓ`, `P(W = −1) = 1 − 1/ℓ`, `A = {1}`; gives `r = 1`.
    #[serde(rename = "twopoint")]
    TwoPointExtreme { ell: u32 },
    /// Atoms `±1` with mass `1/(2ℓ)` each and `±2` with mass `(1 − 1/ℓ)/2`
    /// each, `A = {−1, 1}`; gives `r = 0`.
    #[serde(rename = "fourpoint")]
    SymmetricFourPoint { ell: u32 },
    /// `W ~ Uniform[−1, 1]`, `A = [−1/ℓ, 1/ℓ)`; gives `r = 0`.
    #[serde(rename = "uniform")]
    SymmetricUniform { ell: u32 },
    /// `(1 − 1/ℓ) N(−1/ℓ, σ²) + (1/ℓ) N(1 − 1/ℓ, σ²)` with `A = [w_ℓ, ∞)`;
    /// `r → 1` as `σ → 0`.
    #[serde(rename = "mixture")]
    GaussianMixture { ell: u32, sigma: T },
    /// `N(μ, σ²)` with `ℓ = 2`, `A = [μ, ∞)`; gives `r = √(2/π)`.
    #[serde(rename = "normal")]
    Normal { mu: T, sigma: T },
    /// Log-normal with log-location 0 and log-variance `β`, `ℓ = 2`,
    /// `A = [1, ∞)`.
    #[serde(rename = "lognormal")]
    LogNormal { beta: T },
    /// Finite mass function with an explicit set, the serializable form of
    /// a custom discrete margin.
    #[serde(rename = "discrete")]
    Discrete {
        atoms: Vec<Atom<T>>,
        set: IntervalSet<T>,
        ell: u32,
    },
    #[serde(skip)]
    Custom(CustomMargin<T>),
}

impl<T: Real> MarginSpec<T> {
    /// The declared `ℓ`.
    pub fn ell(&self) -> u32 {
        match self {
            MarginSpec::TwoPointExtreme { ell }
            | MarginSpec::SymmetricFourPoint { ell }
            | MarginSpec::SymmetricUniform { ell }
            | MarginSpec::GaussianMixture { ell, .. }
            | MarginSpec::Discrete { ell, .. } => *ell,
            MarginSpec::Normal { .. } | MarginSpec::LogNormal { .. } => 2,
            MarginSpec::Custom(c) => c.ell,
        }
    }

    /// Short lowercase name of the margin family.
    pub fn kind(&self) -> &'static str {
        match self {
            MarginSpec::TwoPointExtreme { .. } => "twopoint",
            MarginSpec::SymmetricFourPoint { .. } => "fourpoint",
            MarginSpec::SymmetricUniform { .. } => "uniform",
            MarginSpec::GaussianMixture { .. } => "mixture",
            MarginSpec::Normal { .. } => "normal",
            MarginSpec::LogNormal { .. } => "lognormal",
            MarginSpec::Discrete { .. } => "discrete",
            MarginSpec::Custom(_) => "custom",
        }
    }

    /// The set `A`. For the Gaussian mixture this requires locating `w_ℓ`,
    /// so parameters must be valid.
    pub fn set_a(&self) -> Result<IntervalSet<T>, MarginError> {
        self.check_params()?;
        Ok(match self {
            MarginSpec::TwoPointExtreme { .. } => IntervalSet::points(&[T::one()]),
            MarginSpec::SymmetricFourPoint { .. } => IntervalSet::points(&[-T::one(), T::one()]),
            MarginSpec::SymmetricUniform { ell } => {
                let p = reciprocal::<T>(*ell);
                IntervalSet::single(-p, p)
            }
            MarginSpec::GaussianMixture { ell, sigma } => {
                let w = builtin::mixture_threshold(reciprocal::<T>(*ell), *sigma);
                IntervalSet::single(w, T::infinity())
            }
            MarginSpec::Normal { mu, .. } => IntervalSet::single(*mu, T::infinity()),
            MarginSpec::LogNormal { .. } => IntervalSet::single(T::one(), T::infinity()),
            MarginSpec::Discrete { set, .. } => set.clone(),
            MarginSpec::Custom(c) => c.set.clone(),
        })
    }

    pub(crate) fn check_params(&self) -> Result<(), MarginError> {
        let bad = |m: String| Err(MarginError::InvalidParameter(m));
        if self.ell() < 2 {
            return bad(format!("ell must be an integer >= 2, got {}", self.ell()));
        }
        match self {
            MarginSpec::GaussianMixture { sigma, .. } if !(*sigma > T::zero() && sigma.is_finite()) => {
                bad(format!("mixture sigma must be positive and finite, got {sigma}"))
            }
            MarginSpec::Normal { mu, sigma } if !(*sigma > T::zero() && sigma.is_finite() && mu.is_finite()) => {
                bad(format!("normal needs finite mu and positive sigma, got mu={mu}, sigma={sigma}"))
            }
            MarginSpec::LogNormal { beta } if !(*beta > T::zero() && beta.is_finite()) => {
                bad(format!("lognormal beta must be positive and finite, got {beta}"))
            }
            MarginSpec::Discrete { atoms, .. } => {
                if atoms.is_empty() {
                    return bad("discrete margin has no atoms".into());
                }
                if atoms.iter().any(|a| !(a.p >= T::zero()) || !a.x.is_finite()) {
                    return bad("discrete atoms need finite values and non-negative masses".into());
                }
                let total: T = atoms.iter().map(|a| a.p).sum();
                if (total - T::one()).abs() > T::lit(TAU_A) {
                    return bad(format!("discrete masses sum to {total}, not 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Draws `W ~ F` from the margin's own law (not through the split).
    pub fn sample_w<R: Rng>(&self, rng: &mut R) -> Result<T, MarginError> {
        self.check_params()?;
        let p = reciprocal::<T>(self.ell());
        Ok(match self {
            MarginSpec::TwoPointExtreme { .. } => {
                if T::open01(rng) < p {
                    T::one()
                } else {
                    -T::one()
                }
            }
            MarginSpec::SymmetricFourPoint { .. } => {
                let mag = if T::open01(rng) < p { T::one() } else { T::lit(2.0) };
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
            MarginSpec::SymmetricUniform { .. } => T::lit(2.0) * T::open01(rng) - T::one(),
            MarginSpec::GaussianMixture { sigma, .. } => {
                let center = if T::open01(rng) < p { T::one() - p } else { -p };
                center + *sigma * T::standard_normal(rng)
            }
            MarginSpec::Normal { mu, sigma } => *mu + *sigma * T::standard_normal(rng),
            MarginSpec::LogNormal { beta } => (beta.sqrt() * T::standard_normal(rng)).exp(),
            MarginSpec::Discrete { atoms, .. } => draw_atom(atoms, T::open01(rng)),
            MarginSpec::Custom(c) => {
                let r: &mut dyn RngCore = rng;
                (c.sampler)(r)
            }
        })
    }
}

pub(crate) fn reciprocal<T: Real>(ell: u32) -> T {
    T::one() / T::from_u32(ell).expect("ell fits")
}

fn draw_atom<T: Real>(atoms: &[Atom<T>], u: T) -> T {
    let total: T = atoms.iter().map(|a| a.p).sum();
    let target = u * total;
    let mut acc = T::zero();
    for a in atoms {
        acc = acc + a.p;
        if target <= acc && a.p > T::zero() {
            return a.x;
        }
    }
    atoms.iter().rev().find(|a| a.p > T::zero()).map_or(atoms[0].x, |a| a.x)
}

/// Moment bundle of a split margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentBundle<T> {
    pub ell: u32,
    pub mu_u: T,
    pub mu_v: T,
    pub sigma_u: T,
    pub sigma_v: T,
    pub mu: T,
    pub sigma: T,
    pub r: T,
}

impl<T: Real> MomentBundle<T> {
    /// Assembles the bundle from the conditional moments, deriving `μ` and `σ`
    /// from the mixture identities with weight `1/ℓ`.
    pub(crate) fn from_conditional(
        ell: u32,
        mu_u: T,
        mu_v: T,
        sigma_u: T,
        sigma_v: T,
    ) -> Result<Self, MarginError> {
        let p = reciprocal::<T>(ell);
        let q = p * (T::one() - p);
        let mu = (T::one() - p) * mu_u + p * mu_v;
        let gap = mu_u - mu_v;
        let var = (T::one() - p) * sigma_u * sigma_u + p * sigma_v * sigma_v + q * gap * gap;
        if !var.is_finite() {
            return Err(MarginError::InfiniteVariance);
        }
        if var <= T::zero() {
            return Err(MarginError::ZeroVariance);
        }
        let sigma = var.sqrt();
        let r = q.sqrt() * (mu_v - mu_u) / sigma;
        Ok(Self {
            ell,
            mu_u,
            mu_v,
            sigma_u,
            sigma_v,
            mu,
            sigma,
            r,
        })
    }
}

/// Sampling recipe for the conditional laws of a split margin.
#[derive(Clone)]
enum ConditionalLaw<T> {
    Fixed { u: T, v: T },
    SignedPair { u_abs: T, v_abs: T },
    Uniform { p: T },
    HalfNormal { mu: T, sigma: T },
    LogHalfNormal { scale: T },
    Mixture(builtin::MixtureSampler<T>),
    Atoms { u: Vec<Atom<T>>, v: Vec<Atom<T>> },
    Rejection { sampler: VariateFn<T>, set: IntervalSet<T> },
}

/// The operational form of a margin: conditional samplers plus moments.
///
/// Immutable once built; sampling takes an external RNG, so one instance can
/// be shared by any number of workers.
#[derive(Clone)]
pub struct SplitMargin<T> {
    spec: MarginSpec<T>,
    set: IntervalSet<T>,
    moments: MomentBundle<T>,
    law: ConditionalLaw<T>,
}

impl<T: Real> fmt::Debug for SplitMargin<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitMargin")
            .field("kind", &self.spec.kind())
            .field("moments", &self.moments)
            .finish()
    }
}

impl<T: Real> SplitMargin<T> {
    pub fn spec(&self) -> &MarginSpec<T> {
        &self.spec
    }
    pub fn moments(&self) -> &MomentBundle<T> {
        &self.moments
    }
    pub fn set_a(&self) -> &IntervalSet<T> {
        &self.set
    }
    pub fn ell(&self) -> u32 {
        self.moments.ell
    }
    pub fn mu_u(&self) -> T {
        self.moments.mu_u
    }
    pub fn mu_v(&self) -> T {
        self.moments.mu_v
    }
    pub fn sigma_u(&self) -> T {
        self.moments.sigma_u
    }
    pub fn sigma_v(&self) -> T {
        self.moments.sigma_v
    }
    pub fn mu(&self) -> T {
        self.moments.mu
    }
    pub fn sigma(&self) -> T {
        self.moments.sigma
    }
    pub fn r(&self) -> T {
        self.moments.r
    }

    /// One draw of `U = W | W ∉ A`.
    #[inline]
    pub fn sample_u<R: Rng>(&self, rng: &mut R) -> T {
        match &self.law {
            ConditionalLaw::Fixed { u, .. } => *u,
            ConditionalLaw::SignedPair { u_abs, .. } => random_sign(rng, *u_abs),
            ConditionalLaw::Uniform { p } => {
                // Inverse CDF on [−1, −p) ∪ [p, 1).
                let len = T::one() - *p;
                let t = T::lit(2.0) * len * T::open01(rng);
                if t < len {
                    -T::one() + t
                } else {
                    *p + (t - len)
                }
            }
            ConditionalLaw::HalfNormal { mu, sigma } => *mu - *sigma * T::standard_normal(rng).abs(),
            ConditionalLaw::LogHalfNormal { scale } => (-*scale * T::standard_normal(rng).abs()).exp(),
            ConditionalLaw::Mixture(m) => m.sample_u(rng),
            ConditionalLaw::Atoms { u, .. } => draw_atom(u, T::open01(rng)),
            ConditionalLaw::Rejection { sampler, set } => loop {
                let x = sampler(&mut *rng as &mut dyn RngCore);
                if !set.contains(x) {
                    break x;
                }
            },
        }
    }

    /// One draw of `V = W | W ∈ A`.
    #[inline]
    pub fn sample_v<R: Rng>(&self, rng: &mut R) -> T {
        match &self.law {
            ConditionalLaw::Fixed { v, .. } => *v,
            ConditionalLaw::SignedPair { v_abs, .. } => random_sign(rng, *v_abs),
            ConditionalLaw::Uniform { p } => *p * (T::lit(2.0) * T::open01(rng) - T::one()),
            ConditionalLaw::HalfNormal { mu, sigma } => *mu + *sigma * T::standard_normal(rng).abs(),
            ConditionalLaw::LogHalfNormal { scale } => (*scale * T::standard_normal(rng).abs()).exp(),
            ConditionalLaw::Mixture(m) => m.sample_v(rng),
            ConditionalLaw::Atoms { v, .. } => draw_atom(v, T::open01(rng)),
            ConditionalLaw::Rejection { sampler, set } => loop {
                let x = sampler(&mut *rng as &mut dyn RngCore);
                if set.contains(x) {
                    break x;
                }
            },
        }
    }
}

#[inline]
fn random_sign<T: Real, R: Rng>(rng: &mut R, x: T) -> T {
    if rng.random::<bool>() {
        x
    } else {
        -x
    }
}

/// Outcome of a single validation check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub enum Finding<T> {
    InvalidParameter(String),
    NonIntegerReciprocal { prob_a: T, target: T },
    InfiniteVariance,
    ZeroVariance,
    /// `μ_U = μ_V`: `r = 0` and the Gaussian limit holds. Informational.
    EqualConditionalMeans,
}

impl<T> Finding<T> {
    pub fn is_error(&self) -> bool {
        !matches!(self, Finding::EqualConditionalMeans)
    }
}

/// Report produced by [`validate`]. Never an error by itself.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct ValidationReport<T> {
    pub ell: u32,
    pub prob_a: T,
    pub target: T,
    pub variance: T,
    pub mu_u: T,
    pub mu_v: T,
    /// Set when `|μ_U − μ_V| ≤ τ_eq`.
    pub equal_means: bool,
    pub findings: Vec<Finding<T>>,
}

impl<T: Real> ValidationReport<T> {
    pub fn is_valid(&self) -> bool {
        !self.findings.iter().any(Finding::is_error)
    }

    fn invalid(ell: u32, finding: Finding<T>) -> Self {
        let nan = T::nan();
        Self {
            ell,
            prob_a: nan,
            target: if ell >= 1 { reciprocal(ell) } else { nan },
            variance: nan,
            mu_u: nan,
            mu_v: nan,
            equal_means: false,
            findings: vec![finding],
        }
    }

    /// First blocking finding as an error, if any.
    pub fn to_error(&self) -> Option<MarginError> {
        self.findings.iter().find(|f| f.is_error()).map(|f| match f {
            Finding::InvalidParameter(m) => MarginError::InvalidParameter(m.clone()),
            Finding::NonIntegerReciprocal { prob_a, target } => MarginError::NonIntegerReciprocal {
                prob_a: prob_a.to_f64().unwrap_or(f64::NAN),
                target: target.to_f64().unwrap_or(f64::NAN),
            },
            Finding::InfiniteVariance => MarginError::InfiniteVariance,
            Finding::ZeroVariance => MarginError::ZeroVariance,
            Finding::EqualConditionalMeans => unreachable!("informational finding"),
        })
    }
}

/// Everything computed about a margin before sampling machinery is attached.
pub(crate) struct Analysis<T> {
    pub prob_a: T,
    pub variance: T,
    pub mu_u: T,
    pub mu_v: T,
    pub sigma_u: T,
    pub sigma_v: T,
}

fn analyse<T: Real>(spec: &MarginSpec<T>) -> Result<Analysis<T>, MarginError> {
    spec.check_params()?;
    match spec {
        MarginSpec::Discrete { atoms, set, .. } => custom::mass_analysis(atoms, set),
        MarginSpec::Custom(c) => match &c.law {
            CustomLaw::Mass(atoms) => custom::mass_analysis(atoms, &c.set),
            CustomLaw::Density { pdf, support } => custom::density_analysis(pdf.as_ref(), *support, &c.set),
        },
        _ => builtin::analysis(spec),
    }
}

fn report<T: Real>(ell: u32, analysis: Result<Analysis<T>, MarginError>) -> ValidationReport<T> {
    let a = match analysis {
        Ok(a) => a,
        Err(MarginError::ZeroVariance) => return ValidationReport::invalid(ell, Finding::ZeroVariance),
        Err(MarginError::InfiniteVariance) => return ValidationReport::invalid(ell, Finding::InfiniteVariance),
        Err(MarginError::InvalidParameter(m)) | Err(MarginError::Parse(m)) => {
            return ValidationReport::invalid(ell, Finding::InvalidParameter(m))
        }
        Err(e @ MarginError::NonIntegerReciprocal { .. }) => {
            return ValidationReport::invalid(ell, Finding::InvalidParameter(e.to_string()))
        }
    };
    let target = reciprocal::<T>(ell);
    let mut findings = Vec::new();
    if !((a.prob_a - target).abs() <= T::lit(TAU_A)) {
        findings.push(Finding::NonIntegerReciprocal {
            prob_a: a.prob_a,
            target,
        });
    }
    if !a.variance.is_finite() {
        findings.push(Finding::InfiniteVariance);
    } else if a.variance <= T::zero() {
        findings.push(Finding::ZeroVariance);
    }
    let equal_means = (a.mu_u - a.mu_v).abs() <= T::lit(TAU_EQ);
    if equal_means {
        findings.push(Finding::EqualConditionalMeans);
    }
    ValidationReport {
        ell,
        prob_a: a.prob_a,
        target,
        variance: a.variance,
        mu_u: a.mu_u,
        mu_v: a.mu_v,
        equal_means,
        findings,
    }
}

/// Checks admissibility of a margin: `P(W ∈ A)` against `1/ℓ`, finiteness
/// of the variance, and whether `μ_U = μ_V` (the `r = 0` case).
pub fn validate<T: Real>(spec: &MarginSpec<T>) -> ValidationReport<T> {
    report(spec.ell(), analyse(spec))
}

/// Splits a margin into its conditional laws and computes the moment bundle.
pub fn split<T: Real>(spec: &MarginSpec<T>) -> Result<SplitMargin<T>, MarginError> {
    let a = analyse(spec)?;
    let ell = spec.ell();
    let (mu_u, mu_v, sigma_u, sigma_v) = (a.mu_u, a.mu_v, a.sigma_u, a.sigma_v);
    if let Some(err) = report(ell, Ok(a)).to_error() {
        return Err(err);
    }
    let moments = MomentBundle::from_conditional(ell, mu_u, mu_v, sigma_u, sigma_v)?;
    let set = spec.set_a()?;
    let p = reciprocal::<T>(ell);
    let law = match spec {
        MarginSpec::TwoPointExtreme { .. } => ConditionalLaw::Fixed {
            u: -T::one(),
            v: T::one(),
        },
        MarginSpec::SymmetricFourPoint { .. } => ConditionalLaw::SignedPair {
            u_abs: T::lit(2.0),
            v_abs: T::one(),
        },
        MarginSpec::SymmetricUniform { .. } => ConditionalLaw::Uniform { p },
        MarginSpec::GaussianMixture { sigma, .. } => ConditionalLaw::Mixture(builtin::MixtureSampler::new(p, *sigma)),
        MarginSpec::Normal { mu, sigma } => ConditionalLaw::HalfNormal { mu: *mu, sigma: *sigma },
        MarginSpec::LogNormal { beta } => ConditionalLaw::LogHalfNormal { scale: beta.sqrt() },
        MarginSpec::Discrete { atoms, set, .. } => custom::atom_split(atoms, set),
        MarginSpec::Custom(c) => match &c.law {
            CustomLaw::Mass(atoms) => custom::atom_split(atoms, &c.set),
            CustomLaw::Density { .. } => ConditionalLaw::Rejection {
                sampler: c.sampler.clone(),
                set: c.set.clone(),
            },
        },
    };
    let out = SplitMargin {
        spec: spec.clone(),
        set,
        moments,
        law,
    };
    debug_assert!(out.r() * out.r() <= T::one() + T::identity_tol(1e-12));
    Ok(out)
}

/// Shape parameter `r`, evaluated by both of its algebraic forms.
pub fn r_of<T: Real>(split: &SplitMargin<T>) -> Result<T, MarginError> {
    let m = split.moments();
    if !(m.sigma > T::zero()) {
        return Err(MarginError::ZeroVariance);
    }
    let p = reciprocal::<T>(m.ell);
    let first = (p * (T::one() - p)).sqrt() * (m.mu_v - m.mu_u) / m.sigma;
    let ell_minus_one = T::from_u32(m.ell - 1).expect("ell fits");
    let second = (m.mu_v - m.mu) / (m.sigma * ell_minus_one.sqrt());
    debug_assert!(
        (first - second).abs() <= T::identity_tol(1e-12) * T::one().max(first.abs()),
        "r forms disagree: {first} vs {second}"
    );
    Ok(first)
}

// Re-exported for the mixture sampler and tests of truncated laws.
pub(crate) fn truncated_normal_above<T: Real>(center: T, scale: T, z: T, u: T) -> T {
    // Draw from N(center, scale²) restricted to [center + scale z, ∞).
    center - scale * normal_quantile(u * normal_sf(z))
}

pub(crate) fn truncated_normal_below<T: Real>(center: T, scale: T, z: T, u: T) -> T {
    // Draw from N(center, scale²) restricted to (−∞, center + scale z).
    center + scale * normal_quantile(u * normal_cdf(z))
}

#[cfg(test)]
mod tests;
