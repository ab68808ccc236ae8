//! Closed-form moments of the built-in margins.

use rand::Rng;

use super::{reciprocal, truncated_normal_above, truncated_normal_below, Analysis, MarginError, MarginSpec};
use crate::roots::brent;
use crate::scalar::Real;
use crate::special::{normal_cdf, normal_pdf, normal_sf};

pub(super) fn analysis<T: Real>(spec: &MarginSpec<T>) -> Result<Analysis<T>, MarginError> {
    let p = reciprocal::<T>(spec.ell());
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let exact = |prob_a, mu_u, mu_v, sigma_u: T, sigma_v: T| {
        let gap: T = mu_u - mu_v;
        Analysis {
            prob_a,
            variance: (one - p) * sigma_u * sigma_u + p * sigma_v * sigma_v + p * (one - p) * gap * gap,
            mu_u,
            mu_v,
            sigma_u,
            sigma_v,
        }
    };
    Ok(match spec {
        MarginSpec::TwoPointExtreme { .. } => exact(p, -one, one, T::zero(), T::zero()),
        MarginSpec::SymmetricFourPoint { .. } => {
            // Two atoms of mass p/2 inside A.
            exact(p / two + p / two, T::zero(), T::zero(), two, one)
        }
        MarginSpec::SymmetricUniform { .. } => {
            // Uniform density 1/2 over A = [−p, p).
            let prob_a = (p - (-p)) / two;
            let var_v = p * p / three;
            let var_u = (one + p + p * p) / three;
            exact(prob_a, T::zero(), T::zero(), var_u.sqrt(), var_v.sqrt())
        }
        MarginSpec::Normal { mu, sigma } => {
            let half_mean = *sigma * (two / T::PI()).sqrt();
            let cond_sd = *sigma * (one - two / T::PI()).sqrt();
            exact(T::lit(0.5), *mu - half_mean, *mu + half_mean, cond_sd, cond_sd)
        }
        MarginSpec::LogNormal { beta } => {
            let scale = (*beta / two).exp();
            let root = (*beta / two).sqrt();
            let mu_v = scale * (one + root.erf());
            let mu_u = scale * root.erfc();
            let beta_root = beta.sqrt();
            let second = two * (two * *beta).exp();
            let m2_v = second * normal_cdf(two * beta_root);
            let m2_u = second * normal_cdf(-two * beta_root);
            let var_v = (m2_v - mu_v * mu_v).max(T::zero());
            let var_u = (m2_u - mu_u * mu_u).max(T::zero());
            exact(T::lit(0.5), mu_u, mu_v, var_u.sqrt(), var_v.sqrt())
        }
        MarginSpec::GaussianMixture { sigma, .. } => mixture_analysis(p, *sigma),
        MarginSpec::Discrete { .. } | MarginSpec::Custom(_) => {
            unreachable!("numerical margins are analysed in custom.rs")
        }
    })
}

/// Components of the Gaussian mixture: (weight, center).
fn mixture_components<T: Real>(p: T) -> [(T, T); 2] {
    [(T::one() - p, -p), (p, T::one() - p)]
}

fn mixture_survival<T: Real>(p: T, sigma: T, w: T) -> T {
    mixture_components(p)
        .iter()
        .map(|&(weight, center)| weight * normal_sf((w - center) / sigma))
        .sum()
}

/// The threshold `w_ℓ` with `P(W ≥ w_ℓ) = 1/ℓ` for the Gaussian mixture.
pub(super) fn mixture_threshold<T: Real>(p: T, sigma: T) -> T {
    let f = |w: T| mixture_survival(p, sigma, w) - p;
    let lo = -p - T::lit(50.0) * sigma;
    let hi = T::one() - p + T::lit(50.0) * sigma;
    brent(&f, lo, hi, T::epsilon(), 400).expect("survival brackets 1/ell")
}

fn mixture_analysis<T: Real>(p: T, sigma: T) -> Analysis<T> {
    let w = mixture_threshold(p, sigma);
    let mut prob_a = T::zero();
    let mut first_a = T::zero();
    let mut second_a = T::zero();
    for (weight, center) in mixture_components(p) {
        let z = (w - center) / sigma;
        let tail = normal_sf(z);
        let dens = normal_pdf(z);
        prob_a = prob_a + weight * tail;
        first_a = first_a + weight * (center * tail + sigma * dens);
        second_a = second_a + weight * ((center * center + sigma * sigma) * tail + sigma * dens * (center + w));
    }
    let one = T::one();
    // E[W] = 0 and E[W²] = σ² + p(1 − p).
    let second_total = sigma * sigma + p * (one - p);
    let mu_v = first_a / p;
    let mu_u = -first_a / (one - p);
    let var_v = (second_a / p - mu_v * mu_v).max(T::zero());
    let var_u = ((second_total - second_a) / (one - p) - mu_u * mu_u).max(T::zero());
    Analysis {
        prob_a,
        variance: second_total,
        mu_u,
        mu_v,
        sigma_u: var_u.sqrt(),
        sigma_v: var_v.sqrt(),
    }
}

/// Exact sampler for the two truncated laws of the Gaussian mixture:
/// pick a component by its conditional weight, then invert its truncated CDF.
#[derive(Clone, Debug)]
pub(super) struct MixtureSampler<T> {
    sigma: T,
    centers: [T; 2],
    z: [T; 2],
    // P(first component | W ∈ A) and P(first component | W ∉ A).
    first_given_v: T,
    first_given_u: T,
}

impl<T: Real> MixtureSampler<T> {
    pub(super) fn new(p: T, sigma: T) -> Self {
        let w = mixture_threshold(p, sigma);
        let comps = mixture_components(p);
        let z = [(w - comps[0].1) / sigma, (w - comps[1].1) / sigma];
        let above = [comps[0].0 * normal_sf(z[0]), comps[1].0 * normal_sf(z[1])];
        let below = [comps[0].0 * normal_cdf(z[0]), comps[1].0 * normal_cdf(z[1])];
        Self {
            sigma,
            centers: [comps[0].1, comps[1].1],
            z,
            first_given_v: above[0] / (above[0] + above[1]),
            first_given_u: below[0] / (below[0] + below[1]),
        }
    }

    pub(super) fn sample_v<R: Rng>(&self, rng: &mut R) -> T {
        let c = if T::open01(rng) < self.first_given_v { 0 } else { 1 };
        truncated_normal_above(self.centers[c], self.sigma, self.z[c], T::open01(rng))
    }

    pub(super) fn sample_u<R: Rng>(&self, rng: &mut R) -> T {
        let c = if T::open01(rng) < self.first_given_u { 0 } else { 1 };
        truncated_normal_below(self.centers[c], self.sigma, self.z[c], T::open01(rng))
    }
}
