//! Gaussian and chi-squared helpers built on the [`Real`] special functions.

use crate::roots::{brent, expand_bracket};
use crate::scalar::Real;

#[inline]
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

#[inline]
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc()
}

/// Upper tail 1 - Φ(x), accurate for large positive `x`.
#[inline]
pub fn normal_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * (x / T::SQRT_2()).erfc()
}

/// Φ⁻¹(p) for p in (0, 1). Accurate in the lower tail.
pub fn normal_quantile<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    // Adding zero turns the −0 at the median into +0.
    -T::SQRT_2() * (T::lit(2.0) * p).erfc_inv() + T::zero()
}

/// CDF of a chi-squared variable with `dof` degrees of freedom.
#[inline]
pub fn chi2_cdf<T: Real>(g: T, dof: T) -> T {
    T::gamma_p(dof / T::lit(2.0), g / T::lit(2.0))
}

#[inline]
pub fn chi2_sf<T: Real>(g: T, dof: T) -> T {
    T::gamma_q(dof / T::lit(2.0), g / T::lit(2.0))
}

pub fn chi2_pdf<T: Real>(g: T, dof: T) -> T {
    if g < T::zero() {
        return T::zero();
    }
    let half = dof / T::lit(2.0);
    if g == T::zero() {
        return if dof < T::lit(2.0) {
            T::infinity()
        } else if dof == T::lit(2.0) {
            T::lit(0.5)
        } else {
            T::zero()
        };
    }
    let ln = (half - T::one()) * g.ln() - g / T::lit(2.0) - half * T::LN_2() - half.ln_gamma();
    ln.exp()
}

/// Chi-squared quantile by root finding on the regularized gamma function.
/// Lower-tail probabilities use the CDF, upper-tail ones the survival function.
pub fn chi2_quantile<T: Real>(p: T, dof: T) -> T {
    if p <= T::zero() {
        return T::zero();
    }
    if p >= T::one() {
        return T::infinity();
    }
    let upper = p > T::lit(0.5);
    let target = if upper { T::one() - p } else { p };
    let f = |g: T| {
        if upper {
            target - chi2_sf(g, dof)
        } else {
            chi2_cdf(g, dof) - target
        }
    };
    let (lo, hi) = expand_bracket(&f, T::zero(), dof.max(T::one()) * T::lit(2.0));
    brent(&f, lo, hi, T::min_positive_value(), 400).unwrap_or(hi)
}

/// Log-density of the chi distribution (square root of a chi-squared variable).
pub fn chi_ln_pdf<T: Real>(y: T, dof: T) -> T {
    if y < T::zero() {
        return T::neg_infinity();
    }
    let half = dof / T::lit(2.0);
    let norm = (half - T::one()) * T::LN_2() + half.ln_gamma();
    let shape = if dof == T::one() {
        T::zero()
    } else if y == T::zero() {
        return if dof < T::one() { T::infinity() } else { T::neg_infinity() };
    } else {
        (dof - T::one()) * y.ln()
    };
    shape - y * y / T::lit(2.0) - norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_reference_values() {
        assert!((normal_cdf(0.0f64) - 0.5).abs() < 1e-16);
        assert!((normal_quantile(0.975f64) - 1.959963984540054).abs() < 1e-12);
        assert!((normal_pdf(0.0f64) - 0.3989422804014327).abs() < 1e-16);
        assert!((normal_sf(10.0f64) - 7.619853024160527e-24).abs() < 1e-36);
    }

    #[test]
    fn chi2_median_one_dof() {
        let med = chi2_quantile(0.5f64, 1.0);
        assert!((med - 0.454936423119572).abs() < 1e-12);
        assert!((chi2_cdf(med, 1.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn chi2_far_tails() {
        let lo = chi2_quantile(1e-14f64, 1.0);
        assert!((chi2_cdf(lo, 1.0) / 1e-14 - 1.0).abs() < 1e-6);
        let hi = chi2_quantile(1.0 - 1e-14f64, 5.0);
        assert!(chi2_sf(hi, 5.0) < 2e-14);
    }

    #[test]
    fn chi_density_matches_chi2_change_of_variables() {
        for &k in &[1.0f64, 2.0, 5.0, 14.0] {
            for &y in &[0.3f64, 1.0, 2.2, 4.0] {
                let via_chi2 = chi2_pdf(y * y, k) * 2.0 * y;
                let direct = chi_ln_pdf(y, k).exp();
                assert!((via_chi2 - direct).abs() < 1e-13, "k={k} y={y}");
            }
        }
    }
}
