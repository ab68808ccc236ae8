//! Moments of margins given by a mass function or a density.

use super::{Analysis, Atom, ConditionalLaw, IntervalSet, MarginError};
use crate::quad::integrate_range;
use crate::scalar::Real;

/// Integration tolerance for density margins, well under `τ_A`.
const QUAD_TOL: f64 = 1e-13;

fn conditional_moments<T: Real>(mass: T, first: T, second: T) -> (T, T) {
    if mass <= T::zero() {
        return (T::nan(), T::nan());
    }
    let mean = first / mass;
    let var = (second / mass - mean * mean).max(T::zero());
    (mean, var.sqrt())
}

/// `totals` and `in_a` hold the mass, first and second moments about `center`.
fn finish<T: Real>(totals: [T; 3], in_a: [T; 3], center: T) -> Result<Analysis<T>, MarginError> {
    let [m0, m1, m2] = totals;
    let [a0, a1, a2] = in_a;
    if !m2.is_finite() {
        return Err(MarginError::InfiniteVariance);
    }
    // Empty A or A^c yields NaN conditional moments; validation flags P(A).
    let (mu_v, sigma_v) = conditional_moments(a0, a1, a2);
    let (mu_u, sigma_u) = conditional_moments(m0 - a0, m1 - a1, m2 - a2);
    let shift = m1 / m0;
    Ok(Analysis {
        prob_a: a0 / m0,
        variance: m2 / m0 - shift * shift,
        mu_u: center + mu_u,
        mu_v: center + mu_v,
        sigma_u,
        sigma_v,
    })
}

/// Exact summation over a finite mass function.
pub(super) fn mass_analysis<T: Real>(
    atoms: &[Atom<T>],
    set: &IntervalSet<T>,
) -> Result<Analysis<T>, MarginError> {
    let total: T = atoms.iter().map(|a| a.p).sum();
    let center = atoms.iter().map(|a| a.p * a.x).sum::<T>() / total;
    let mut totals = [T::zero(); 3];
    let mut in_a = [T::zero(); 3];
    for a in atoms {
        let d = a.x - center;
        let terms = [a.p, a.p * d, a.p * d * d];
        let inside = set.contains(a.x);
        for i in 0..3 {
            totals[i] = totals[i] + terms[i];
            if inside {
                in_a[i] = in_a[i] + terms[i];
            }
        }
    }
    finish(totals, in_a, center)
}

/// Adaptive quadrature of a density, splitting at every endpoint of `A`.
pub(super) fn density_analysis<T: Real>(
    pdf: &(dyn Fn(T) -> T + Send + Sync),
    support: (T, T),
    set: &IntervalSet<T>,
) -> Result<Analysis<T>, MarginError> {
    let (lo, hi) = support;
    if !(lo < hi) {
        return Err(MarginError::InvalidParameter(format!(
            "density support must satisfy lo < hi, got ({lo}, {hi})"
        )));
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(set.endpoints().into_iter().filter(|&x| lo < x && x < hi));
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut points"));
    cuts.dedup();

    let (totals, _) = moments_about(pdf, &cuts, set, T::zero());
    if !totals[2].is_finite() {
        return Err(MarginError::InfiniteVariance);
    }
    let center = totals[1] / totals[0];
    let (totals, in_a) = moments_about(pdf, &cuts, set, center);
    finish(totals, in_a, center)
}

fn moments_about<T: Real>(
    pdf: &(dyn Fn(T) -> T + Send + Sync),
    cuts: &[T],
    set: &IntervalSet<T>,
    center: T,
) -> ([T; 3], [T; 3]) {
    let tol = T::identity_tol(QUAD_TOL);
    let mut totals = [T::zero(); 3];
    let mut in_a = [T::zero(); 3];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inside = set.contains(interior_point(a, b));
        for (k, slot) in totals.iter_mut().enumerate() {
            let g = |x: T| {
                let f = pdf(x);
                let d = x - center;
                match k {
                    0 => f,
                    1 => d * f,
                    _ => d * d * f,
                }
            };
            // Scale the tolerance to the size of the piece.
            let rough = integrate_range(g, a, b, T::lit(1e-6));
            let scale = T::one().max(rough.value.abs());
            let q = integrate_range(g, a, b, tol * scale);
            let diverged = !q.value.is_finite() || (!q.converged && q.abs_error > T::lit(1e-8) * scale);
            let value = if k == 2 && diverged { T::infinity() } else { q.value };
            *slot = *slot + value;
            if inside {
                in_a[k] = in_a[k] + value;
            }
        }
    }
    (totals, in_a)
}

fn interior_point<T: Real>(a: T, b: T) -> T {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => (a + b) / T::lit(2.0),
        (true, false) => a + T::one(),
        (false, true) => b - T::one(),
        (false, false) => T::zero(),
    }
}

pub(super) fn atom_split<T: Real>(atoms: &[Atom<T>], set: &IntervalSet<T>) -> ConditionalLaw<T> {
    let (v, u): (Vec<Atom<T>>, Vec<Atom<T>>) = atoms
        .iter()
        .filter(|a| a.p > T::zero())
        .partition(|a| set.contains(a.x));
    ConditionalLaw::Atoms { u, v }
}
