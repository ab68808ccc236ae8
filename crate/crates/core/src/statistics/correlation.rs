use rayon::prelude::*;
use serde::Serialize;

use super::StatsError;
use crate::construction::{build_d, build_x, draw_labels};
use crate::margins::SplitMargin;
use crate::rng::replication_rng;
use crate::scalar::Real;

/// Pearson correlation; `None` for fewer than two points or a constant input.
pub fn sample_correlation<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_usize(xs.len())?;
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct PairCorrelation<T> {
    pub a: usize,
    pub b: usize,
    pub rho_x: Option<T>,
    pub rho_d: Option<T>,
    pub pass_x: bool,
    pub pass_d: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Real")]
pub struct CorrelationReport<T> {
    pub m: usize,
    pub reps: usize,
    /// `4/√reps`.
    pub threshold: T,
    pub pairs: Vec<PairCorrelation<T>>,
}

impl<T: Real> CorrelationReport<T> {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass_x && p.pass_d)
    }
}

/// Correlation across replications of `(X_a, X_b)` and `(D_a, D_b)` for
/// 1-based indices `a ≠ b`.
pub fn pairwise_correlation_check<T: Real>(
    split: &SplitMargin<T>,
    m: usize,
    reps: usize,
    pairs: &[(usize, usize)],
    seed: u64,
) -> Result<CorrelationReport<T>, StatsError> {
    let n = m * m.saturating_sub(1) / 2;
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a == 0 || b == 0 || a > n || b > n || a == b) {
        return Err(StatsError::InvalidParameter(format!(
            "pair ({a}, {b}) needs distinct indices in 1..={n}"
        )));
    }
    if reps < 2 {
        return Err(StatsError::InvalidParameter("need at least two replications".into()));
    }
    let mut wanted: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let rows = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, m as u64, rep as u64);
            let labels = draw_labels(split.ell(), m, &mut rng)?;
            let d = build_d(&labels);
            let x = build_x(&d, split, &mut rng);
            Ok(wanted
                .iter()
                .map(|&k| (x.x()[k - 1], if d.bits()[k - 1] { T::one() } else { T::zero() }))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, StatsError>>()?;
    let column = |k: usize, pick: fn(&(T, T)) -> T| -> Vec<T> {
        let pos = wanted.binary_search(&k).expect("index collected");
        rows.iter().map(|r| pick(&r[pos])).collect()
    };
    let threshold = T::lit(4.0) / T::from_usize(reps).expect("reps fits").sqrt();
    let pass = |rho: Option<T>| rho.is_some_and(|r| r.abs() < threshold);
    let out = pairs
        .iter()
        .map(|&(a, b)| {
            let rho_x = sample_correlation(&column(a, |p| p.0), &column(b, |p| p.0));
            let rho_d = sample_correlation(&column(a, |p| p.1), &column(b, |p| p.1));
            PairCorrelation {
                a,
                b,
                rho_x,
                rho_d,
                pass_x: pass(rho_x),
                pass_d: pass(rho_d),
            }
        })
        .collect();
    Ok(CorrelationReport {
        m,
        reps,
        threshold,
        pairs: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::margins::{split, MarginSpec};

    #[test]
    fn correlation_basics() {
        let v = [1.0f64, 4.0, 2.0, 8.0];
        assert!((sample_correlation(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((sample_correlation(&v, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(sample_correlation(&v, &[1.0; 4]), None);
        assert_eq!(sample_correlation(&v[..1], &v[..1]), None);
    }

    #[test]
    fn rejects_bad_pairs() {
        let s = split(&MarginSpec::<f64>::Normal { mu: 0.0, sigma: 1.0 }).unwrap();
        assert!(pairwise_correlation_check(&s, 4, 10, &[(1, 7)], 0).is_err());
        assert!(pairwise_correlation_check(&s, 4, 10, &[(2, 2)], 0).is_err());
        assert!(pairwise_correlation_check(&s, 4, 10, &[(0, 1)], 0).is_err());
    }
}
