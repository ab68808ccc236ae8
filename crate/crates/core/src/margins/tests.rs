use std::sync::Arc;

use proptest::prelude::{prop, prop_assert, proptest};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::quad::integrate_range;
use crate::special::normal_pdf;

fn normal(mu: f64, sigma: f64) -> MarginSpec<f64> {
    MarginSpec::Normal { mu, sigma }
}

fn exponential_custom() -> CustomMargin<f64> {
    CustomMargin {
        law: CustomLaw::Density {
            pdf: Arc::new(|x: f64| if x >= 0.0 { (-x).exp() } else { 0.0 }),
            support: (0.0, f64::INFINITY),
        },
        sampler: Arc::new(|rng: &mut dyn RngCore| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        }),
        set: IntervalSet::single(std::f64::consts::LN_2, f64::INFINITY),
        ell: 2,
    }
}

fn uniform_custom(a_lo: f64, a_hi: f64) -> CustomMargin<f64> {
    CustomMargin {
        law: CustomLaw::Density {
            pdf: Arc::new(|_| 0.5),
            support: (-1.0, 1.0),
        },
        sampler: Arc::new(|rng: &mut dyn RngCore| 2.0 * rng.random::<f64>() - 1.0),
        set: IntervalSet::single(a_lo, a_hi),
        ell: 2,
    }
}

#[test]
fn normal_r_is_sqrt_two_over_pi() {
    for (mu, sigma) in [(0.0, 1.0), (3.0, 0.2), (-7.0, 11.0)] {
        let s = split(&normal(mu, sigma)).unwrap();
        assert!((s.r() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((r_of(&s).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-12);
        assert!((s.mu() - mu).abs() < 1e-12 * (1.0 + mu.abs()));
        assert!((s.sigma() - sigma).abs() < 1e-12 * sigma);
    }
}

#[test]
fn four_point_has_equal_conditional_means() {
    for ell in [2, 3, 7] {
        let s = split(&MarginSpec::<f64>::SymmetricFourPoint { ell }).unwrap();
        assert_eq!(s.mu_u(), 0.0);
        assert_eq!(s.mu_v(), 0.0);
        assert_eq!(r_of(&s).unwrap(), 0.0);
    }
}

#[test]
fn two_point_has_r_exactly_one() {
    for ell in [2, 3, 4, 5, 10, 97] {
        let s = split(&MarginSpec::<f64>::TwoPointExtreme { ell }).unwrap();
        assert_eq!(s.sigma_u(), 0.0);
        assert_eq!(s.sigma_v(), 0.0);
        assert!(s.mu_v() > s.mu_u());
        assert_eq!(r_of(&s).unwrap(), 1.0, "ell={ell}");
    }
}

/// Truncated log-normal mean by Simpson's rule on the log scale, independent
/// of the erf closed form.
fn lognormal_mu_v_simpson(beta: f64) -> f64 {
    let sd = beta.sqrt();
    let upper = 40.0 * sd + 40.0;
    let n = 400_000;
    let h = upper / n as f64;
    let f = |y: f64| 2.0 * (y - y * y / (2.0 * beta)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = f(0.0) + f(upper);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn lognormal_r_matches_closed_form_and_quadrature() {
    for (beta, expected) in [(0.5, 0.646_236_617_765_953), (1.0, 0.520_806_048_855_890), (4.0, 0.130_376_978_687_936)] {
        let s = split(&MarginSpec::<f64>::LogNormal { beta }).unwrap();
        let closed = Real::erf((beta / 2.0f64).sqrt()) / (beta.exp() - 1.0).sqrt();
        assert!((s.r() - closed).abs() < 1e-10, "beta={beta}: {} vs {closed}", s.r());
        assert!((s.r() - expected).abs() < 1e-12);
        let mu_v = lognormal_mu_v_simpson(beta);
        assert!((mu_v - s.mu_v()).abs() < 1e-8 * s.mu_v(), "beta={beta}");
    }
}

#[test]
fn lognormal_large_beta_drives_r_to_zero() {
    let s = split(&MarginSpec::<f64>::LogNormal { beta: 25.0 }).unwrap();
    assert!(s.r() > 0.0 && s.r() < 1e-5, "{}", s.r());
}

#[test]
fn symmetric_uniform_reports_r_zero() {
    let rep = validate(&MarginSpec::<f64>::SymmetricUniform { ell: 2 });
    assert_eq!(rep.prob_a, 0.5);
    assert!(rep.is_valid());
    assert!(rep.equal_means);
    assert!(rep.findings.contains(&Finding::EqualConditionalMeans));
}

#[test]
fn custom_with_wrong_mass_on_a_is_flagged() {
    // Uniform[-1, 1] with A = [-0.4, 0.4): P(A) = 0.4.
    let spec = MarginSpec::Custom(uniform_custom(-0.4, 0.4));
    let rep = validate(&spec);
    assert!(!rep.is_valid());
    assert!(matches!(rep.findings[0], Finding::NonIntegerReciprocal { prob_a, .. } if (prob_a - 0.4).abs() < 1e-12));
    assert!(matches!(split(&spec), Err(MarginError::NonIntegerReciprocal { .. })));
}

#[test]
fn custom_uniform_matches_builtin() {
    let custom = split(&MarginSpec::Custom(uniform_custom(-0.5, 0.5))).unwrap();
    let builtin = split(&MarginSpec::<f64>::SymmetricUniform { ell: 2 }).unwrap();
    assert!((custom.sigma() - builtin.sigma()).abs() < 1e-12);
    assert!((custom.sigma_u() - builtin.sigma_u()).abs() < 1e-12);
    assert!(custom.r().abs() < 1e-12);
}

#[test]
fn mixture_is_valid_with_r_near_one() {
    let spec = MarginSpec::<f64>::GaussianMixture { ell: 2, sigma: 0.05 };
    let rep = validate(&spec);
    assert!(rep.is_valid(), "{rep:?}");
    assert!((rep.prob_a - 0.5).abs() < 1e-12);
    let s = split(&spec).unwrap();
    assert!(s.r() > 0.97 && s.r() < 1.0, "{}", s.r());
    // Smaller component spread pushes r towards 1.
    let tighter = split(&MarginSpec::<f64>::GaussianMixture { ell: 2, sigma: 0.005 }).unwrap();
    assert!(tighter.r() > s.r());
}

#[test]
fn invalid_parameters_are_reported() {
    let rep = validate(&MarginSpec::<f64>::TwoPointExtreme { ell: 1 });
    assert!(matches!(rep.findings[0], Finding::InvalidParameter(_)));
    assert!(matches!(split(&normal(0.0, 0.0)), Err(MarginError::InvalidParameter(_))));
    assert!(validate(&MarginSpec::<f64>::LogNormal { beta: -1.0 }).to_error().is_some());
}

#[test]
fn degenerate_discrete_margin_has_zero_variance() {
    let spec = MarginSpec::Discrete {
        atoms: vec![Atom { x: 3.0f64, p: 0.5 }, Atom { x: 3.0, p: 0.5 }],
        set: IntervalSet::single(2.0, 4.0),
        ell: 2,
    };
    // All of the mass sits in A, so both the mass check and the variance fail.
    let rep = validate(&spec);
    assert!(rep.findings.iter().any(|f| matches!(f, Finding::ZeroVariance)));
}

#[test]
fn zero_variance_from_split() {
    let spec = MarginSpec::Discrete {
        atoms: vec![Atom { x: 1.0f64, p: 0.5 }, Atom { x: 1.0, p: 0.5 }],
        set: IntervalSet::new(vec![Interval::point(1.0)]),
        ell: 2,
    };
    assert!(split(&spec).is_err());
}

/// Declared density or mass of each built-in, for numerical recomputation.
enum Declared {
    Density(Box<dyn Fn(f64) -> f64>, Vec<f64>),
    Mass(Vec<(f64, f64)>),
}

fn declared(spec: &MarginSpec<f64>) -> Declared {
    match *spec {
        MarginSpec::TwoPointExtreme { ell } => {
            let p = 1.0 / ell as f64;
            Declared::Mass(vec![(1.0, p), (-1.0, 1.0 - p)])
        }
        MarginSpec::SymmetricFourPoint { ell } => {
            let p = 1.0 / ell as f64;
            Declared::Mass(vec![(-1.0, p / 2.0), (1.0, p / 2.0), (-2.0, (1.0 - p) / 2.0), (2.0, (1.0 - p) / 2.0)])
        }
        MarginSpec::SymmetricUniform { ell } => {
            let p = 1.0 / ell as f64;
            Declared::Density(Box::new(|x| if (-1.0..1.0).contains(&x) { 0.5 } else { 0.0 }), vec![-1.0, -p, p, 1.0])
        }
        MarginSpec::GaussianMixture { ell, sigma } => {
            let p = 1.0 / ell as f64;
            let w = spec.set_a().unwrap().intervals[0].lo;
            Declared::Density(
                Box::new(move |x| {
                    (1.0 - p) * normal_pdf((x + p) / sigma) / sigma + p * normal_pdf((x - 1.0 + p) / sigma) / sigma
                }),
                vec![f64::NEG_INFINITY, -p, w, 1.0 - p, f64::INFINITY],
            )
        }
        MarginSpec::Normal { mu, sigma } => Declared::Density(
            Box::new(move |x| normal_pdf((x - mu) / sigma) / sigma),
            vec![f64::NEG_INFINITY, mu, f64::INFINITY],
        ),
        MarginSpec::LogNormal { beta } => Declared::Density(
            Box::new(move |x| {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_pdf(x.ln() / beta.sqrt()) / (x * beta.sqrt())
                }
            }),
            vec![0.0, 1.0, f64::INFINITY],
        ),
        _ => unreachable!(),
    }
}

/// Returns (mass, first, second) over A and over the whole line.
fn recompute(spec: &MarginSpec<f64>) -> ([f64; 3], [f64; 3]) {
    let set = spec.set_a().unwrap();
    let mut in_a = [0.0; 3];
    let mut all = [0.0; 3];
    match declared(spec) {
        Declared::Mass(atoms) => {
            for (x, p) in atoms {
                let t = [p, p * x, p * x * x];
                for k in 0..3 {
                    all[k] += t[k];
                    if set.contains(x) {
                        in_a[k] += t[k];
                    }
                }
            }
        }
        Declared::Density(f, cuts) => {
            for w in cuts.windows(2) {
                let probe = if w[0].is_finite() && w[1].is_finite() {
                    0.5 * (w[0] + w[1])
                } else if w[0].is_finite() {
                    w[0] + 1.0
                } else {
                    w[1] - 1.0
                };
                for k in 0..3 {
                    let q = integrate_range(|x| f(x) * x.powi(k as i32), w[0], w[1], 1e-14);
                    all[k] += q.value;
                    if set.contains(probe) {
                        in_a[k] += q.value;
                    }
                }
            }
        }
    }
    (in_a, all)
}

#[test]
fn builtin_identities_hold_against_numerical_moments() {
    let specs = [
        MarginSpec::TwoPointExtreme { ell: 3 },
        MarginSpec::SymmetricFourPoint { ell: 4 },
        MarginSpec::SymmetricUniform { ell: 5 },
        MarginSpec::GaussianMixture { ell: 3, sigma: 0.1 },
        normal(1.5, 2.0),
        MarginSpec::LogNormal { beta: 0.5 },
    ];
    for spec in &specs {
        let s = split(spec).unwrap();
        let (in_a, all) = recompute(spec);
        let p = 1.0 / spec.ell() as f64;
        assert!((in_a[0] - p).abs() < 1e-10, "{}: P(A)={}", spec.kind(), in_a[0]);
        let mu = all[1];
        let var = all[2] - mu * mu;
        let mu_v = in_a[1] / in_a[0];
        let mu_u = (all[1] - in_a[1]) / (all[0] - in_a[0]);
        let var_v = in_a[2] / in_a[0] - mu_v * mu_v;
        let var_u = (all[2] - in_a[2]) / (all[0] - in_a[0]) - mu_u * mu_u;
        let tol = 1e-10 * (1.0 + var.abs());
        assert!((mu - ((1.0 - p) * mu_u + p * mu_v)).abs() < tol, "{} mean identity", spec.kind());
        let decomposed = (1.0 - p) * var_u + p * var_v + p * (1.0 - p) * (mu_u - mu_v).powi(2);
        assert!((var - decomposed).abs() < tol, "{} variance identity", spec.kind());
        // The analytic bundle agrees with the numerical one.
        assert!((s.mu_u() - mu_u).abs() < tol, "{} mu_u", spec.kind());
        assert!((s.mu_v() - mu_v).abs() < tol, "{} mu_v", spec.kind());
        assert!((s.sigma() * s.sigma() - var).abs() < tol, "{} sigma", spec.kind());
        assert!((s.sigma_u().powi(2) - var_u).abs() < tol, "{} sigma_u", spec.kind());
        assert!((s.sigma_v().powi(2) - var_v).abs() < tol, "{} sigma_v", spec.kind());
    }
}

#[test]
fn conditional_samplers_hit_their_sets_and_means() {
    let specs = [
        MarginSpec::TwoPointExtreme { ell: 3 },
        MarginSpec::SymmetricFourPoint { ell: 2 },
        MarginSpec::SymmetricUniform { ell: 3 },
        MarginSpec::GaussianMixture { ell: 2, sigma: 0.05 },
        MarginSpec::GaussianMixture { ell: 4, sigma: 0.3 },
        normal(0.0, 1.0),
        MarginSpec::LogNormal { beta: 1.0 },
        MarginSpec::Custom(exponential_custom()),
    ];
    let draws = 1_000_000;
    for (idx, spec) in specs.iter().enumerate() {
        let s = split(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + idx as u64);
        for (name, mean, sd, in_a) in [("U", s.mu_u(), s.sigma_u(), false), ("V", s.mu_v(), s.sigma_v(), true)] {
            let mut sum = 0.0;
            for _ in 0..draws {
                let x = if in_a { s.sample_v(&mut rng) } else { s.sample_u(&mut rng) };
                assert_eq!(s.set_a().contains(x), in_a, "{} {name} draw {x} on wrong side of A", spec.kind());
                sum += x;
            }
            let emp = sum / draws as f64;
            let se = sd / (draws as f64).sqrt();
            assert!(
                (emp - mean).abs() <= 4.0 * se + 1e-12,
                "{} {name}: mean {emp} vs {mean} (se {se})",
                spec.kind()
            );
        }
    }
}

#[test]
fn r_invariant_under_affine_maps() {
    let base = exponential_custom();
    let r0 = split(&MarginSpec::Custom(base.clone())).unwrap().r();
    let s = split(&MarginSpec::<f64>::Custom(base.clone())).unwrap();
    // Exponential with A = [ln 2, ∞): μ_V = 1 + ln 2, μ = σ = 1.
    let expected = 0.5 * (1.0 + std::f64::consts::LN_2 - (1.0 - std::f64::consts::LN_2)) / 1.0;
    assert!((s.r() - expected).abs() < 1e-10, "{} vs {expected}", s.r());
    for (a, b) in [(3.0, -5.0), (0.01, 100.0), (250.0, 0.0)] {
        let r = split(&MarginSpec::Custom(base.affine(a, b))).unwrap().r();
        assert!((r - r0).abs() < 1e-10, "a={a} b={b}: {r} vs {r0}");
    }
}

#[test]
fn sample_w_respects_mass_on_a() {
    let spec = MarginSpec::<f64>::GaussianMixture { ell: 3, sigma: 0.1 };
    let set = spec.set_a().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 300_000;
    let hits = (0..n).filter(|_| set.contains(spec.sample_w(&mut rng).unwrap())).count();
    let p = 1.0 / 3.0;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - p).abs() < 4.0 * se);
}

#[test]
fn json_round_trip_and_custom_rejected() {
    let spec = MarginSpec::<f64>::GaussianMixture { ell: 3, sigma: 0.25 };
    let json = serde_json::to_string(&spec).unwrap();
    assert_eq!(json, r#"{"kind":"mixture","params":{"ell":3,"sigma":0.25}}"#);
    let back: MarginSpec<f64> = serde_json::from_str(&json).unwrap();
    assert!(matches!(back, MarginSpec::GaussianMixture { ell: 3, sigma } if sigma == 0.25));
    assert!(serde_json::to_string(&MarginSpec::Custom(exponential_custom())).is_err());
    assert!(serde_json::from_str::<MarginSpec<f64>>(r#"{"kind":"custom","params":{}}"#).is_err());
}

#[test]
fn discrete_json_margin_splits_exactly() {
    let json = r#"{"kind":"discrete","params":{"atoms":[{"x":-1.0,"p":0.75},{"x":1.0,"p":0.25}],"set":[{"lo":1.0,"hi":1.0}],"ell":4}}"#;
    let spec: MarginSpec<f64> = serde_json::from_str(json).unwrap();
    let s = split(&spec).unwrap();
    assert_eq!(s.r(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    assert_eq!(s.sample_v(&mut rng), 1.0);
    assert_eq!(s.sample_u(&mut rng), -1.0);
}

#[test]
fn f32_split_agrees_with_f64() {
    let s32 = split(&MarginSpec::<f32>::LogNormal { beta: 1.0 }).unwrap();
    let s64 = split(&MarginSpec::<f64>::LogNormal { beta: 1.0 }).unwrap();
    assert!((s32.r() as f64 - s64.r()).abs() < 1e-5);
}

proptest! {
    #[test]
    fn r_squared_bounded(ell in 2u32..12, sigma in 0.01f64..3.0, beta in 0.05f64..20.0) {
        for spec in [
            MarginSpec::GaussianMixture { ell, sigma },
            MarginSpec::LogNormal { beta },
            MarginSpec::TwoPointExtreme { ell },
        ] {
            let r = split(&spec).unwrap().r();
            prop_assert!(r * r <= 1.0 + 1e-12, "{} r={}", spec.kind(), r);
        }
    }

    #[test]
    fn only_uniform_weights_satisfy_all_conditions(raw in prop::collection::vec(0.01f64..1.0, 2..7)) {
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let w: f64 = p.iter().map(|x| x * x).sum();
        let rep = check_weight_conditions_with(&p, w, 1e-9);
        let ell = p.len() as f64;
        let uniform = p.iter().all(|x| (x - 1.0 / ell).abs() < 1e-4);
        prop_assert!(rep.holds[0] && rep.holds[1]);
        if !uniform {
            prop_assert!(!rep.all_hold(), "non-uniform {p:?} passed");
        }
    }
}
