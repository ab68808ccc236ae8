//! The limit law `S = √(1−r²) Z + r χ` with `Z` standard Gaussian and
//! `χ = (Γ − k)/√(2k)`, `Γ ~ χ²_k`, `k = ℓ − 1`.
//!
//! The density and distribution function are convolutions of the Gaussian
//! kernel against the chi-squared component. They are integrated over the
//! chi variable `Y = √Γ`, whose density is bounded for every `k`, so no
//! singular endpoint appears even at `ℓ = 2`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quad::integrate_pieces;
use crate::roots::{brent, expand_bracket};
use crate::scalar::Real;
use crate::special::{chi2_pdf, chi2_quantile, chi_ln_pdf, normal_cdf, normal_pdf, normal_quantile};

/// `|r|` below this uses the Gaussian branch.
pub const R_ZERO_TOL: f64 = 1e-12;
/// `1 − |r|` below this uses the pure chi-squared branch.
pub const R_ONE_TOL: f64 = 1e-12;
/// Chi-squared mass dropped at each end of the convolution.
const TAIL_MASS: f64 = 1e-14;
/// Half-width of the Gaussian kernel window, in kernel standard deviations.
const KERNEL_REACH: f64 = 10.0;
const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitLawError {
    #[error("invalid limit law parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Gaussian,
    ChiSquared,
    Mixed,
}

/// The two-parameter law of `S`.
#[derive(Clone, Debug)]
pub struct LimitLaw<T> {
    ell: u32,
    r: T,
    k: T,
    branch: Branch,
    // Chi-squared quantiles bounding the convolution.
    band: (T, T),
}

/// Mean, variance and the third and fourth central moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
    pub third: T,
    pub fourth: T,
}

/// Law metadata as written next to pdf/cdf grids.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct LawSummary<T> {
    pub ell: u32,
    pub r: T,
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub kurtosis: T,
    pub support: (T, T),
}

impl<T: Real> LimitLaw<T> {
    pub fn new(ell: u32, r: T) -> Result<Self, LimitLawError> {
        if ell < 2 {
            return Err(LimitLawError::InvalidParameter(format!("ell must be >= 2, got {ell}")));
        }
        if !(r.abs() <= T::one()) {
            return Err(LimitLawError::InvalidParameter(format!("r must lie in [-1, 1], got {r}")));
        }
        let k = T::from_u32(ell - 1).expect("ell fits");
        let branch = if r.abs() < T::lit(R_ZERO_TOL) {
            Branch::Gaussian
        } else if T::one() - r.abs() < T::lit(R_ONE_TOL) {
            Branch::ChiSquared
        } else {
            Branch::Mixed
        };
        let band = if branch == Branch::Mixed {
            (
                chi2_quantile(T::lit(TAIL_MASS), k),
                chi2_quantile(T::one() - T::lit(TAIL_MASS), k),
            )
        } else {
            (T::zero(), T::infinity())
        };
        Ok(Self { ell, r, k, branch, band })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }
    pub fn r(&self) -> T {
        self.r
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `E[e^{itS}] = e^{−(1−r²)t²/2} e^{−itr√(k/2)} (1 − itr√(2/k))^{−k/2}`,
    /// principal branch.
    pub fn cf(&self, t: T) -> Complex<T> {
        let two = T::lit(2.0);
        let r = self.r;
        let k = self.k;
        let gauss = (-(T::one() - r * r) * t * t / two).exp();
        let shift = Complex::new(T::zero(), -t * r * (k / two).sqrt()).exp();
        let chi = Complex::new(T::one(), -t * r * (two / k).sqrt()).powf(-k / two);
        shift * chi * gauss
    }

    /// Sign of `r` and the law for `|r|`; the density of `−S` is the
    /// reflection of that of `S`.
    fn reflected(&self) -> bool {
        self.r < T::zero()
    }

    /// Support of `S`. Unbounded unless `|r| = 1`.
    pub fn support(&self) -> (T, T) {
        if self.branch != Branch::ChiSquared {
            return (T::neg_infinity(), T::infinity());
        }
        let edge = (self.k / T::lit(2.0)).sqrt();
        if self.reflected() {
            (T::neg_infinity(), edge)
        } else {
            (-edge, T::infinity())
        }
    }

    pub fn pdf(&self, s: T) -> T {
        let s = if self.reflected() { -s } else { s };
        match self.branch {
            Branch::Gaussian => normal_pdf(s),
            Branch::ChiSquared => {
                let scale = (T::lit(2.0) * self.k).sqrt();
                chi2_pdf(self.k + s * scale, self.k) * scale
            }
            Branch::Mixed => self.mixed_pdf(s),
        }
    }

    pub fn cdf(&self, s: T) -> T {
        if self.reflected() {
            return T::one() - self.upper_cdf(-s);
        }
        self.upper_cdf(s)
    }

    /// CDF of the law with `|r|`.
    fn upper_cdf(&self, s: T) -> T {
        match self.branch {
            Branch::Gaussian => normal_cdf(s),
            Branch::ChiSquared => {
                let g = self.k + s * (T::lit(2.0) * self.k).sqrt();
                T::gamma_p(self.k / T::lit(2.0), g.max(T::zero()) / T::lit(2.0))
            }
            Branch::Mixed => self.mixed_cdf(s),
        }
    }

    fn kernel(&self) -> (T, T) {
        let r = self.r.abs();
        (r / (T::lit(2.0) * self.k).sqrt(), (T::one() - r * r).sqrt())
    }

    /// Range of `y = √Γ` whose chi-squared contribution lands within the
    /// kernel window around `s`, plus breakpoints inside it.
    fn window(&self, s: T) -> Option<(T, Vec<T>)> {
        let (c, sz) = self.kernel();
        let reach = T::lit(KERNEL_REACH) * sz;
        let g_lo = self.k + (s - reach) / c;
        let g_hi = self.k + (s + reach) / c;
        let lo = g_lo.max(self.band.0).max(T::zero());
        let hi = g_hi.min(self.band.1);
        if !(lo < hi) {
            return None;
        }
        let (y_lo, y_hi) = (lo.sqrt(), hi.sqrt());
        let mut cuts = vec![y_lo, y_hi];
        let center = self.k + s / c;
        let mode = (self.k - T::one()).max(T::zero());
        for g in [center, mode] {
            let y = g.max(T::zero()).sqrt();
            if y_lo < y && y < y_hi {
                cuts.push(y);
            }
        }
        Some((g_lo, cuts))
    }

    fn mixed_pdf(&self, s: T) -> T {
        let (c, sz) = self.kernel();
        let Some((_, cuts)) = self.window(s) else {
            return T::zero();
        };
        let k = self.k;
        let f = |y: T| {
            let x = c * (y * y - k);
            (chi_ln_pdf(y, k)).exp() * normal_pdf((s - x) / sz) / sz
        };
        integrate_pieces(f, &cuts, T::identity_tol(QUAD_TOL)).value.max(T::zero())
    }

    fn mixed_cdf(&self, s: T) -> T {
        let (c, sz) = self.kernel();
        let k = self.k;
        let Some((g_lo, cuts)) = self.window(s) else {
            // The whole band lies on one side of the kernel window.
            let g = self.k + s / c;
            return if g > self.band.1 { T::one() } else { T::zero() };
        };
        // Below the window the Gaussian factor is 1 to double precision.
        let below = T::gamma_p(k / T::lit(2.0), g_lo.max(T::zero()) / T::lit(2.0));
        let f = |y: T| {
            let x = c * (y * y - k);
            (chi_ln_pdf(y, k)).exp() * normal_cdf((s - x) / sz)
        };
        let inside = integrate_pieces(f, &cuts, T::identity_tol(QUAD_TOL)).value;
        (below + inside).max(T::zero()).min(T::one())
    }

    /// Inverse CDF by bracketed root finding, to `|cdf(s) − p| ≤ 1e−10`.
    pub fn quantile(&self, p: T) -> Result<T, LimitLawError> {
        if !(p > T::zero() && p < T::one()) {
            return Err(LimitLawError::Domain(format!("quantile needs p in (0, 1), got {p}")));
        }
        let scale = (T::lit(2.0) * self.k).sqrt();
        Ok(match (self.branch, self.reflected()) {
            (Branch::Gaussian, _) => normal_quantile(p),
            (Branch::ChiSquared, false) => (chi2_quantile(p, self.k) - self.k) / scale,
            (Branch::ChiSquared, true) => -(chi2_quantile(T::one() - p, self.k) - self.k) / scale,
            (Branch::Mixed, _) => {
                let f = |s: T| self.cdf(s) - p;
                let start = normal_quantile(p);
                let (lo, hi) = expand_bracket(&f, start - T::one(), start + T::one());
                brent(&f, lo, hi, T::epsilon(), 200).unwrap_or(start)
            }
        })
    }

    /// One draw `√(1−r²) Z + r (Γ − k)/√(2k)`.
    pub fn sample_one<R: Rng + ?Sized>(&self, chi2: &T::ChiSquared, rng: &mut R) -> T {
        let z = T::standard_normal(rng);
        let g = chi2.sample(rng);
        let r = self.r;
        (T::one() - r * r).sqrt() * z + r * (g - self.k) / (T::lit(2.0) * self.k).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<T> {
        let chi2 = T::chi_squared(self.k);
        (0..count).map(|_| self.sample_one(&chi2, rng)).collect()
    }

    /// `(0, 1, √(8/k) r³, 3 + 12 r⁴/k)`.
    pub fn moments(&self) -> Moments<T> {
        let r = self.r;
        let r3 = r * r * r;
        Moments {
            mean: T::zero(),
            variance: T::one(),
            third: (T::lit(8.0) / self.k).sqrt() * r3,
            fourth: T::lit(3.0) + T::lit(12.0) * r3 * r / self.k,
        }
    }

    /// Largest gap between this CDF and the standard Gaussian CDF over the
    /// grid `−8, −8 + 0.001, ..., 8`.
    pub fn gaussian_distance(&self) -> T {
        self.gaussian_distance_on(T::lit(-8.0), T::lit(8.0), T::lit(1e-3))
    }

    pub fn gaussian_distance_on(&self, lo: T, hi: T, step: T) -> T {
        let points = ((hi - lo) / step).round().to_usize().expect("grid size") + 1;
        (0..points)
            .into_par_iter()
            .map(|i| {
                let s = lo + step * T::from_usize(i).expect("index fits");
                (self.cdf(s) - normal_cdf(s)).abs()
            })
            .reduce(T::zero, T::max)
    }

    pub fn summary(&self) -> LawSummary<T> {
        let m = self.moments();
        LawSummary {
            ell: self.ell,
            r: self.r,
            mean: m.mean,
            variance: m.variance,
            skewness: m.third,
            kurtosis: m.fourth,
            support: self.support(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_range;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn law(ell: u32, r: f64) -> LimitLaw<f64> {
        LimitLaw::new(ell, r).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LimitLaw::new(1, 0.5f64).is_err());
        assert!(LimitLaw::new(2, 1.01f64).is_err());
        assert!(LimitLaw::new(2, f64::NAN).is_err());
        assert!(law(2, 0.5).quantile(0.0).is_err());
        assert!(law(2, 0.5).quantile(1.0).is_err());
    }

    #[test]
    fn cf_reference_values() {
        assert_eq!(law(4, 0.7).cf(0.0), Complex::new(1.0, 0.0));
        for ell in [2, 3, 9] {
            let c = law(ell, 0.0).cf(1.0);
            assert!((c - Complex::new((-0.5f64).exp(), 0.0)).norm() < 1e-15);
        }
        let c = law(2, 1.0).cf(1.0);
        assert!((c.re - 0.739_921_898_987_484_2).abs() < 1e-14);
        assert!((c.im - -0.172_817_396_660_119_42).abs() < 1e-14);
        // Conjugate symmetry.
        let l = law(3, 0.6);
        assert!((l.cf(-1.7) - l.cf(1.7).conj()).norm() < 1e-15);
    }

    #[test]
    fn pdf_cdf_reference_values() {
        let cases = [
            (2, 0.8, 0.0, 0.471_971_034_946_106_4, 0.569_220_922_923_527_6),
            (2, 0.8, -1.0, 0.291_401_874_385_02, 0.118_015_739_956_29),
            (2, 0.8, 2.0, 0.043_570_729_587_12, 0.959_109_014_556_49),
            (3, 0.5, 0.3, 0.379_057_604_660_66, 0.632_665_667_122_05),
            (6, 0.9, -0.5, 0.451_815_940_624_76, 0.339_204_034_528_24),
        ];
        for (ell, r, s, pdf, cdf) in cases {
            let l = law(ell, r);
            assert!((l.pdf(s) - pdf).abs() < 1e-11, "pdf ell={ell} r={r} s={s}: {}", l.pdf(s));
            assert!((l.cdf(s) - cdf).abs() < 1e-11, "cdf ell={ell} r={r} s={s}: {}", l.cdf(s));
        }
    }

    #[test]
    fn degenerate_branches() {
        assert!((law(2, 0.0).pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert_eq!(law(2, 0.0).cdf(0.0), 0.5);
        let chi = law(2, 1.0);
        assert_eq!(chi.branch(), Branch::ChiSquared);
        assert_eq!(chi.pdf(-0.71), 0.0);
        assert!((chi.cdf(-0.385_418_151_389_945_7) - 0.5).abs() < 1e-14);
        assert_eq!(law(2, 1.0 - 1e-13).branch(), Branch::ChiSquared);
        assert_eq!(law(2, 1e-13).branch(), Branch::Gaussian);
        assert_eq!(chi.support().0, -(0.5f64).sqrt());
        let neg = law(2, -1.0);
        assert_eq!(neg.support().1, (0.5f64).sqrt());
        assert!((neg.cdf(0.385_418_151_389_945_7) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn negative_r_reflects() {
        for (ell, r) in [(2, 0.8), (3, 0.3), (6, 1.0)] {
            let (pos, neg) = (law(ell, r), law(ell, -r));
            for s in [-2.5, -0.4, 0.0, 0.9, 3.3] {
                assert!((neg.pdf(s) - pos.pdf(-s)).abs() < 1e-14);
                assert!((neg.cdf(s) - (1.0 - pos.cdf(-s))).abs() < 1e-14);
            }
            assert!((neg.moments().third + pos.moments().third).abs() < 1e-15);
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        let l = law(3, 0.7);
        let h = 1e-4;
        for s in [-1.5, -0.2, 0.6, 2.4] {
            let numeric = (l.cdf(s + h) - l.cdf(s - h)) / (2.0 * h);
            assert!((numeric - l.pdf(s)).abs() < 1e-7, "s={s}");
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (ell, r) in [(2, 0.8), (4, 0.95), (2, 0.999_999)] {
            let l = law(ell, r);
            let q = integrate_range(|s| l.pdf(s), -40.0, 40.0 + (ell as f64).sqrt(), 1e-11);
            assert!((q.value - 1.0).abs() < 1e-9, "ell={ell} r={r}: {}", q.value);
        }
    }

    #[test]
    fn quantile_round_trips() {
        let l = law(2, 0.95);
        let median = l.quantile(0.5).unwrap();
        assert!(median < 0.0);
        assert!((l.cdf(median) - 0.5).abs() <= 1e-10);
        assert!((law(5, 0.0).quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert_eq!(law(5, 0.0).quantile(0.5).unwrap(), 0.0);
        for p in [1e-9, 0.01, 0.3, 0.77, 0.999] {
            let q = law(3, -0.6).quantile(p).unwrap();
            assert!((law(3, -0.6).cdf(q) - p).abs() <= 1e-10, "p={p}");
        }
    }

    #[test]
    fn gaussian_distance_trends() {
        let d = |ell, r| law(ell, r).gaussian_distance_on(-8.0, 8.0, 0.01);
        assert!(d(2, 0.0) < 1e-12);
        assert!((d(3, 0.9) - 0.092_139).abs() < 1e-5);
        assert!(d(3, 0.9) > d(6, 0.9) && d(6, 0.9) > d(15, 0.9));
        assert!(d(2, 0.6) < d(2, 0.8) && d(2, 0.8) < d(2, 0.95));
    }

    #[test]
    fn sampler_moments() {
        let l = law(2, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let xs = l.sample(&mut rng, n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 4.0 * (15.0f64 - 1.0).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn moments_formula() {
        let m = law(2, 1.0).moments();
        assert!((m.third - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.fourth, 15.0);
        let g = law(7, 0.0).moments();
        assert_eq!((g.mean, g.variance, g.third, g.fourth), (0.0, 1.0, 0.0, 3.0));
        assert!((law(2, 0.8).moments().third - 1.448_154_687_870_049_5).abs() < 1e-12);
    }

    #[test]
    fn f32_law_evaluates() {
        let l = LimitLaw::new(2, 0.8f32).unwrap();
        assert!((l.cdf(0.0) - 0.569_220_9).abs() < 1e-5);
        assert!((l.pdf(0.0) - 0.471_971).abs() < 1e-5);
    }
}
