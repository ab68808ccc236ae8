//! Bracketed scalar root finding.

use crate::scalar::Real;

/// Widens `[lo, hi]` geometrically until `f` changes sign across it.
///
/// `lo` is kept fixed when `f(lo) <= 0` (typical for CDF-type functions
/// with a known lower support edge); otherwise both ends move outward.
pub fn expand_bracket<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T) -> (T, T) {
    let mut width = (hi - lo).abs().max(T::one());
    for _ in 0..200 {
        let flo = f(lo);
        let fhi = f(hi);
        if flo <= T::zero() && fhi >= T::zero() {
            break;
        }
        if flo > T::zero() {
            lo = lo - width;
        }
        if fhi < T::zero() {
            hi = hi + width;
        }
        width = width * T::lit(2.0);
    }
    (lo, hi)
}

/// Brent's method. Requires `f(lo)` and `f(hi)` of opposite sign (or zero).
/// Returns `None` if the bracket is invalid.
pub fn brent<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T, xtol: T, max_iter: usize) -> Option<T> {
    let two = T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == T::zero() {
        return Some(a);
    }
    if fb == T::zero() {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + xtol / two;
        let m = (c - b) / two;
        if m.abs() <= tol || fb == T::zero() {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
    }
    Some(b)
}
