//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_error: T,
    /// False if the segment budget ran out before reaching the tolerance.
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    let res_abs = res_abs * half_len.abs();
    let res_asc = res_asc * half_len.abs();
    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        error = res_asc * T::one().min((T::lit(200.0) * error / res_asc).powf(T::lit(1.5)));
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(floor);
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over the finite interval `[a, b]` to absolute tolerance `tol`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Quadrature<T> {
    if a == b {
        return Quadrature {
            value: T::zero(),
            abs_error: T::zero(),
            converged: true,
        };
    }
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let total_err: T = segments.iter().map(|s| s.error).sum();
        if total_err <= tol || segments.len() >= MAX_SEGMENTS {
            let value = segments.iter().map(|s| s.value).sum();
            return Quadrature {
                value,
                abs_error: total_err,
                converged: total_err <= tol,
            };
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // Interval can no longer be split in this precision; accept it.
            segments.push(Segment { error: T::zero(), ..seg });
            continue;
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }
}

/// Integrates over `[a, b]` where either end may be infinite.
pub fn integrate_range<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Quadrature<T> {
    range_dyn(&f, a, b, tol)
}

fn range_dyn<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> Quadrature<T> {
    let one = T::one();
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, tol),
        (true, false) => integrate(
            |t: T| {
                let u = one - t;
                f(a + t / u) / (u * u)
            },
            T::zero(),
            one,
            tol,
        ),
        (false, true) => integrate(
            |t: T| {
                let u = one - t;
                f(b - t / u) / (u * u)
            },
            T::zero(),
            one,
            tol,
        ),
        (false, false) => {
            let half = tol / T::lit(2.0);
            let left = range_dyn(f, T::neg_infinity(), T::zero(), half);
            let right = range_dyn(f, T::zero(), T::infinity(), half);
            combine(&[left, right])
        }
    }
}

/// Integrates piecewise between consecutive sorted `points` (ends may be infinite),
/// sharing the tolerance across pieces. Use it to keep discontinuities and kinks
/// on segment boundaries.
pub fn integrate_pieces<T: Real, F: Fn(T) -> T>(f: F, points: &[T], tol: T) -> Quadrature<T> {
    let mut pts: Vec<T> = points.iter().copied().filter(|p| !p.is_nan()).collect();
    pts.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    pts.dedup();
    if pts.len() < 2 {
        return integrate(f, T::zero(), T::zero(), tol);
    }
    let share = tol / T::from_usize(pts.len() - 1).expect("piece count");
    let parts: Vec<_> = pts.windows(2).map(|w| integrate_range(&f, w[0], w[1], share)).collect();
    combine(&parts)
}

fn combine<T: Real>(parts: &[Quadrature<T>]) -> Quadrature<T> {
    Quadrature {
        value: parts.iter().map(|q| q.value).sum(),
        abs_error: parts.iter().map(|q| q.abs_error).sum(),
        converged: parts.iter().all(|q| q.converged),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x: f64| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((q.value - 8.0).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn gaussian_over_line() {
        let q = integrate_range(
            |x: f64| (-x * x / 2.0).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            1e-12,
        );
        assert!((q.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn integrable_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-9);
        assert!((q.value - 2.0).abs() < 1e-8, "{q:?}");
    }

    #[test]
    fn step_function_on_breakpoints() {
        let f = |x: f64| if x < 0.25 { 1.0 } else { 3.0 };
        let q = integrate_pieces(f, &[0.0, 0.25, 1.0], 1e-13);
        assert!((q.value - (0.25 + 2.25)).abs() < 1e-14);
    }

    #[test]
    fn works_in_f32() {
        let q = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, 1e-5);
        assert!((q.value - 2.0).abs() < 1e-5);
    }
}
