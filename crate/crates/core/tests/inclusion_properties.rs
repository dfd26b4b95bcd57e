mod common;

use common::*;
use ellinc::dualfn::DualEvalContext;
use ellinc::ellipsoid::{normalize, Ellipsoid};
use ellinc::inclusion::*;
use ellinc::oracle::boundary_max_norm;
use proptest::prelude::*;

fn same_tag(a: &Verdict, b: &Verdict) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

#[test]
fn trichotomy_agrees_with_boundary_sampling() {
    let mut rng = rng(2024);
    let mut compared = 0;
    for &n in &[2usize, 3, 5, 10] {
        for _ in 0..250 {
            let (e, e0) = random_pair(n, &mut rng);
            let report = boundary_max_norm(&e, &e0, 256).unwrap();
            let radius = report.max_sq_norm.sqrt();
            let resolution = report.resolution.tolerance(report.max_sq_norm);
            if (radius - 1.0).abs() <= 3.0 * resolution {
                continue;
            }
            compared += 1;
            let expected = if radius > 1.0 {
                Verdict::Outside
            } else {
                Verdict::StrictlyInside
            };
            let got = decide(&e, &e0, DEFAULT_EPS).unwrap();
            assert_eq!(got.verdict, expected, "n={n}, oracle max norm {radius}, rule {}", got.rule);
        }
    }
    assert!(compared >= 990, "only {compared} instances had a usable margin");
}

#[test]
fn pretest_verdicts_survive_without_pretests() {
    let mut rng = rng(77);
    let mut fired = 0;
    for &n in &[1usize, 2, 3, 6] {
        for _ in 0..200 {
            let (e, e0) = random_pair(n, &mut rng);
            if let Some(v) = pretest(&e, &e0).unwrap() {
                fired += 1;
                let raw = decide_with(&e, &e0, DecideOptions { eps: DEFAULT_EPS, pretests: false }).unwrap();
                assert!(same_tag(&v.verdict, &raw.verdict), "{:?} vs {:?}", v, raw);
            }
        }
    }
    // Concentric pairs never arise from random centers; add some.
    for k in 1..20 {
        let e0 = random_e0(3, &mut rng);
        let e = Ellipsoid::new(e0.center().to_vec(), e0.shape().scaled(1.0 + k as f64 / 10.0)).unwrap();
        let v = pretest(&e, &e0).unwrap().unwrap();
        let raw = decide_with(&e, &e0, DecideOptions { eps: DEFAULT_EPS, pretests: false }).unwrap();
        assert_eq!(v.verdict, raw.verdict);
    }
    assert!(fired > 100);
}

#[test]
fn certificate_exits_are_confirmed_by_refinement() {
    let mut rng = rng(5);
    let mut certified = 0;
    for &n in &[2usize, 3, 5, 10] {
        for _ in 0..300 {
            let (e, e0) = random_pair(n, &mut rng);
            let v = decide(&e, &e0, DEFAULT_EPS).unwrap();
            if v.rule != Rule::Bisection(BisectionExit::Certificate) {
                continue;
            }
            certified += 1;
            let ctx = DualEvalContext::new(normalize(&e, &e0).unwrap());
            let (mut l, mut u) = v.bracket.unwrap();
            while u - l > 1e-13 {
                let m = 0.5 * (l + u);
                if m <= l || m >= u {
                    break;
                }
                if ctx.ell_prime(m).unwrap() > 0.0 {
                    l = m;
                } else {
                    u = m;
                }
            }
            let best = ctx.ell(l).unwrap().max(ctx.ell(u).unwrap());
            assert!(best < -1.0, "refined maximum {best} is not below -1");
        }
    }
    assert!(certified > 20, "only {certified} certificate exits observed");
}

#[test]
fn degenerate_contact_points_lie_on_both_boundaries() {
    let mut rng = rng(31);
    for k in 0..40 {
        let n = 2 + k % 5;
        let (e, e0) = degenerate_touching_pair(n, &mut rng);
        let set = contact_points(&e, &e0, 1e-9).unwrap();
        assert!(set.degenerate);
        for p in &set.points {
            assert!((e.level(p).unwrap() - 1.0).abs() <= 1e-8);
            assert!((e0.level(p).unwrap() - 1.0).abs() <= 1e-8);
        }
    }
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(3), Just(5)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strong_duality(seed in any::<u64>(), n in dims()) {
        let mut rng = rng(seed);
        let (e, e0) = random_scaling_pair(n, &mut rng);
        let sr = minimal_scaling(&e, &e0, DEFAULT_TOL).unwrap();
        let report = boundary_max_norm(&e, &e0, 512).unwrap();
        let scale = report.max_sq_norm.max(1.0);
        prop_assert!((sr.ell_star + report.max_sq_norm).abs() <= 1e-7 * scale,
            "dual {} vs primal {}", sr.ell_star, -report.max_sq_norm);
    }

    #[test]
    fn rescaling_e0_gives_a_touching_pair(seed in any::<u64>(), n in prop_oneof![Just(2usize), Just(10), Just(30)]) {
        let mut rng = rng(seed);
        let (e, e0) = random_scaling_pair(n, &mut rng);
        let gamma = minimal_scaling(&e, &e0, DEFAULT_TOL).unwrap().gamma;

        let shrunk = e0.with_shape_scaled(1.0 / gamma).unwrap();
        let again = minimal_scaling(&e, &shrunk, DEFAULT_TOL).unwrap();
        prop_assert!((again.ell_star + 1.0).abs() <= 1e-7);

        let root = gamma.sqrt();
        let d: Vec<f64> = e.center().iter().zip(e0.center()).map(|(c, c0)| (c - c0) / root + c0).collect();
        let moved = Ellipsoid::new(d, e.shape().scaled(gamma)).unwrap();
        prop_assert!((minimal_scaling(&moved, &e0, DEFAULT_TOL).unwrap().ell_star + 1.0).abs() <= 1e-7);

        let delta = 1e-4;
        let looser = e0.with_shape_scaled(1.0 / (gamma * (1.0 + delta))).unwrap();
        let tighter = e0.with_shape_scaled(1.0 / (gamma * (1.0 - delta))).unwrap();
        prop_assert_eq!(decide(&e, &looser, DEFAULT_EPS).unwrap().verdict, Verdict::StrictlyInside);
        prop_assert_eq!(decide(&e, &tighter, DEFAULT_EPS).unwrap().verdict, Verdict::Outside);
    }

    #[test]
    fn contact_points_after_rescaling(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = rng(seed);
        let (e, e0) = random_scaling_pair(n, &mut rng);
        let (set, sr) = contact_points_rescaled(&e, &e0, DEFAULT_TOL).unwrap();
        let touched = e0.with_shape_scaled(1.0 / sr.gamma).unwrap();
        prop_assert!(!set.points.is_empty());
        for p in &set.points {
            prop_assert!((e.level(p).unwrap() - 1.0).abs() <= 1e-8);
            prop_assert!((touched.level(p).unwrap() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn gamma_is_invariant_under_uniform_scaling(seed in any::<u64>(), n in dims(), rho in 0.1f64..10.0) {
        let mut rng = rng(seed);
        let (e, e0) = random_scaling_pair(n, &mut rng);
        let stretch = |x: &Ellipsoid| {
            let c: Vec<f64> = x.center().iter().map(|v| rho * v).collect();
            Ellipsoid::new(c, x.shape().scaled(1.0 / (rho * rho))).unwrap()
        };
        let g = minimal_scaling(&e, &e0, DEFAULT_TOL).unwrap().gamma;
        let g_rho = minimal_scaling(&stretch(&e), &stretch(&e0), DEFAULT_TOL).unwrap().gamma;
        prop_assert!((g - g_rho).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn touching_verdicts_carry_a_narrow_bracket(seed in any::<u64>(), n in dims()) {
        let mut rng = rng(seed);
        let (e, e0) = random_scaling_pair(n, &mut rng);
        let gamma = minimal_scaling(&e, &e0, DEFAULT_TOL).unwrap().gamma;
        let touched = e0.with_shape_scaled(1.0 / gamma).unwrap();
        if let Verdict::TouchingWithinEps { lower, upper } = decide(&e, &touched, DEFAULT_EPS).unwrap().verdict {
            prop_assert!(upper - lower <= DEFAULT_EPS);
        }
    }

    #[test]
    fn cover_is_the_largest_individual_gamma(seed in any::<u64>(), n in dims(), count in 1usize..6) {
        let mut rng = rng(seed);
        let template = random_e0(n, &mut rng);
        let es: Vec<Ellipsoid> = (0..count).map(|_| random_scaling_pair(n, &mut rng).0).collect();
        let r = cover(&template, &es, DEFAULT_TOL, true).unwrap();
        let direct: Vec<f64> = es.iter().map(|e| minimal_scaling(e, &template, DEFAULT_TOL).unwrap().gamma).collect();
        let max = direct.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((r.gamma - max).abs() <= 1e-10 * max.max(1.0));
        prop_assert!((r.per_ellipsoid_gammas[r.argmax_index] - r.gamma).abs() == 0.0);
    }
}
