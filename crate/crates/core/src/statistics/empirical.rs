use serde::Serialize;

use super::StatsError;
use crate::scalar::Real;

/// Right-continuous empirical CDF of a finite sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution<T> {
    sorted: Vec<T>,
}

impl<T: Real> EmpiricalDistribution<T> {
    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }
    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    /// `F̂(x) = #{x_i ≤ x} / n`.
    pub fn eval(&self, x: T) -> T {
        self.fraction(self.sorted.partition_point(|&v| v <= x))
    }

    /// `F̂(x⁻) = #{x_i < x} / n`.
    pub fn eval_left(&self, x: T) -> T {
        self.fraction(self.sorted.partition_point(|&v| v < x))
    }

    fn fraction(&self, k: usize) -> T {
        T::from_usize(k).expect("count fits") / T::from_usize(self.sorted.len()).expect("count fits")
    }
}

pub fn ecdf<T: Real>(values: &[T]) -> Result<EmpiricalDistribution<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(EmpiricalDistribution { sorted })
}

/// `sup_x |F̂(x) − F(x)|`, attained at a sample point from the left or right.
pub fn ks_distance<T: Real, F: Fn(T) -> T>(emp: &EmpiricalDistribution<T>, cdf: F) -> T {
    let xs = &emp.sorted;
    let n = T::from_usize(xs.len()).expect("count fits");
    let mut worst = T::zero();
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = cdf(x);
        let below = T::from_usize(i).expect("index fits") / n;
        let at = T::from_usize(j).expect("index fits") / n;
        worst = worst.max((at - f).abs()).max((below - f).abs());
        i = j;
    }
    worst
}

/// Population-normalized sample moments. Skewness and kurtosis (non-excess)
/// are `None` when the variance is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct EmpiricalMoments<T> {
    pub mean: T,
    pub variance: T,
    pub skewness: Option<T>,
    pub kurtosis: Option<T>,
}

pub fn empirical_moments<T: Real>(values: &[T]) -> Result<EmpiricalMoments<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = T::from_usize(values.len()).expect("count fits");
    let mean = values.iter().copied().sum::<T>() / n;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, kurtosis) = if m2 > T::zero() {
        (Some(m3 / m2.powf(T::lit(1.5))), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(EmpiricalMoments {
        mean,
        variance: m2,
        skewness,
        kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;
    use proptest::prelude::{prop, prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ecdf_examples() {
        let one = ecdf(&[1.0f64]).unwrap();
        assert_eq!(one.eval(0.999), 0.0);
        assert_eq!(one.eval(1.0), 1.0);
        let e = ecdf(&[3.0f64, 1.0, 2.0]).unwrap();
        assert!((e.eval(2.0) - 2.0 / 3.0).abs() < 1e-16);
        assert_eq!(e, ecdf(&[1.0, 2.0, 3.0]).unwrap());
        assert_eq!(ecdf::<f64>(&[]), Err(StatsError::EmptySample));
        assert_eq!(ecdf(&[f64::NAN]), Err(StatsError::NotANumber));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&ecdf(&[0.0f64]).unwrap(), normal_cdf), 0.5);
        assert_eq!(ks_distance(&ecdf(&[0.0f64]).unwrap(), |_| 0.5), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..1_000_000).map(|_| <f64 as Real>::standard_normal(&mut rng)).collect();
        assert!(ks_distance(&ecdf(&xs).unwrap(), normal_cdf) < 0.002);
    }

    #[test]
    fn ks_handles_ties() {
        // Uniform on [-1, 1]: F(0) = 1/2 against the jump from 0 to 3/4 at 0.
        let e = ecdf(&[0.0f64, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(ks_distance(&e, |x: f64| ((x + 1.0) / 2.0).clamp(0.0, 1.0)), 0.5);
    }

    #[test]
    fn moment_examples() {
        let c = empirical_moments(&[2.5f64; 5]).unwrap();
        assert_eq!((c.mean, c.variance, c.skewness, c.kurtosis), (2.5, 0.0, None, None));
        let pm = empirical_moments(&[-1.0f64, 1.0]).unwrap();
        assert_eq!((pm.mean, pm.variance), (0.0, 1.0));
        assert_eq!(pm.skewness, Some(0.0));
        assert_eq!(pm.kurtosis, Some(1.0));
        assert!(empirical_moments::<f64>(&[]).is_err());
    }

    proptest! {
        #[test]
        fn ks_invariant_under_increasing_maps(xs in prop::collection::vec(-5.0f64..5.0, 1..60)) {
            let direct = ks_distance(&ecdf(&xs).unwrap(), normal_cdf);
            let mapped: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let via = ks_distance(&ecdf(&mapped).unwrap(), |y: f64| normal_cdf(y.ln()));
            prop_assert!((direct - via).abs() < 1e-12);
        }
    }
}
