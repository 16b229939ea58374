use std::f64::consts::TAU;

use inscribe_core::config::{check_interleaved_on_circle, detect_cyclically_reducible_quadratic, is_concyclic, make_pinwheel};
use inscribe_core::curves::fit_from_uniform_samples;
use inscribe_core::interp::{build_transfer, build_transfer_pinwheel, ev, interpolate, transfer_between, CMatrix};
use inscribe_core::sampling::{random_config, random_curve, random_interleaved_config};
use inscribe_core::solver::{fit_cassini, find_inscriptions, residual_system, SolveOptions, ACCEPT_TOL, DEDUP_TOL};
use inscribe_core::symplectic::{diagonal_forms, maslov_index_diagonal};
use inscribe_core::{JordanCurve, PointConfig, Polynomial};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> Polynomial {
    Polynomial::new(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curve_json_round_trip(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed)).unwrap();
        let text = serde_json::to_string(&curve).unwrap();
        let back: JordanCurve = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, curve);
    }

    #[test]
    fn curve_combination_is_linear(seed in any::<u64>(), a in complex(), b in complex(), t in 0.0..TAU) {
        let mut r = rng(seed);
        let (c1, c2) = (random_curve(&mut r).unwrap(), random_curve(&mut r).unwrap());
        let lhs = c1.combine(a, &c2, b).eval(t);
        let rhs = a * c1.eval(t) + b * c2.eval(t);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference(seed in any::<u64>(), t in 0.0..TAU) {
        let curve = random_curve(&mut rng(seed)).unwrap();
        let h = 1e-6;
        let fd = (curve.eval(t + h) - curve.eval(t - h)) / (2.0 * h);
        prop_assert!((curve.derivative(t) - fd).norm() < 1e-5);
    }

    #[test]
    fn uniform_fit_recovers_coefficients(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed)).unwrap();
        let fitted = fit_from_uniform_samples(&curve.sample(256), 16).unwrap();
        for k in -16..=16 {
            prop_assert!((fitted.coeff(k) - curve.coeff(k)).norm() < 1e-8, "k = {}", k);
        }
    }

    #[test]
    fn reversal_flips_turning_number(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed)).unwrap();
        let (fwd, back) = (curve.validate(), curve.reversed().validate());
        prop_assert!(fwd.is_valid() && back.is_valid());
        prop_assert_eq!(fwd.turning_number, -back.turning_number);
    }

    #[test]
    fn interpolation_round_trip(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let nodes = random_config(&mut r, n).unwrap().alpha().to_vec();
        let p = random_poly(&mut r, n);
        let q = interpolate(&nodes, &ev(&p, &nodes)).unwrap();
        prop_assert!(q.distance(&p) < 1e-9, "distance {}", q.distance(&p));
    }

    #[test]
    fn transfer_fixes_constants(seed in any::<u64>(), n in 2usize..=8) {
        let f = build_transfer(&random_config(&mut rng(seed), n).unwrap()).unwrap();
        let image = f.apply(&vec![Complex64::new(1.0, 0.0); n]);
        prop_assert!(image.iter().all(|z| (z - 1.0).norm() < 1e-9));
    }

    #[test]
    fn transfer_maps_values_to_values(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let q = random_config(&mut r, n).unwrap();
        let p = random_poly(&mut r, n);
        let image = build_transfer(&q).unwrap().apply(&ev(&p, q.alpha()));
        for (a, b) in image.iter().zip(ev(&p, q.beta())) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn transfers_compose(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let (a, b) = (random_config(&mut r, n).unwrap(), random_config(&mut r, n).unwrap());
        let (alpha, beta, delta) = (a.alpha(), a.beta(), b.alpha());
        let f_ab = transfer_between(alpha, beta).unwrap();
        let f_bd = transfer_between(beta, delta).unwrap();
        let f_ad = transfer_between(alpha, delta).unwrap();
        let scale = f_ab.condition_estimate.max(f_bd.condition_estimate);
        prop_assert!(max_diff(&(&f_bd.matrix * &f_ab.matrix), &f_ad.matrix) < 1e-8 * scale.max(1.0));
    }

    #[test]
    fn pinwheel_group_law(n in 2usize..=8, a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let lhs = build_transfer_pinwheel(n, a).matrix * build_transfer_pinwheel(n, b).matrix;
        prop_assert!(max_diff(&lhs, &build_transfer_pinwheel(n, a + b).matrix) < 1e-10);
    }

    #[test]
    fn near_boundary_pinwheels_interleave(n in 2usize..=8) {
        let eps = 1e-3;
        prop_assert!(check_interleaved_on_circle(&make_pinwheel(n, eps).unwrap()).unwrap());
        prop_assert!(check_interleaved_on_circle(&make_pinwheel(n, TAU / n as f64 - eps).unwrap()).unwrap());
    }

    #[test]
    fn concyclicity_is_similarity_invariant(seed in any::<u64>(), a in complex(), b in complex(), on_circle in any::<bool>()) {
        prop_assume!(a.norm() > 0.1);
        let mut r = rng(seed);
        let pts: Vec<Complex64> = if on_circle {
            random_interleaved_config(&mut r, 3).unwrap().points()
        } else {
            random_config(&mut r, 3).unwrap().points()
        };
        let moved: Vec<Complex64> = pts.iter().map(|z| a * z + b).collect();
        let (before, after) = (is_concyclic(&pts).unwrap(), is_concyclic(&moved).unwrap());
        prop_assert_eq!(before.is_some(), after.is_some());
        if let (Some(x), Some(y)) = (before, after) {
            prop_assert!((a * x.center + b - y.center).norm() < 1e-8);
            prop_assert!((a.norm() * x.radius - y.radius).abs() < 1e-8);
        }
    }

    #[test]
    fn reducible_center_is_translation_equivariant(seed in any::<u64>(), w in complex()) {
        let mut r = rng(seed);
        // c + sqrt(P) with P on an off-origin circle
        let c = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let center = Complex64::new(0.4, -0.3);
        let q: Vec<Complex64> = (0..3)
            .flat_map(|k| {
                let p = center + Complex64::from_polar(1.0, r.random_range(0.0..TAU / 3.0) + k as f64 * TAU / 3.0);
                let root = p.sqrt();
                [c + root, c - root]
            })
            .collect();
        let shifted: Vec<Complex64> = q.iter().map(|z| z + w).collect();
        let (a, b) = (
            detect_cyclically_reducible_quadratic(&q).unwrap(),
            detect_cyclically_reducible_quadratic(&shifted).unwrap(),
        );
        prop_assert!(a.is_some() && b.is_some());
        prop_assert!((a.unwrap().center + w - b.unwrap().center).norm() < 1e-10);
    }

    #[test]
    fn forms_are_positive_and_rotation_invariant(seed in any::<u64>(), n in 2usize..=6, phi in 0.0..TAU) {
        let q = random_interleaved_config(&mut rng(seed), n).unwrap();
        let forms = diagonal_forms(&q).unwrap();
        prop_assert!(forms.lambda_pos.iter().chain(&forms.mu_pos).all(|v| *v > 0.0));
        prop_assert!((forms.mu_pos[n - 1] - 2.0).abs() < 1e-12);
        prop_assert!(forms.pullback_defect < 1e-8);
        let rot = Complex64::from_polar(1.0, phi);
        let turned = diagonal_forms(&q.map(|z| rot * z).unwrap()).unwrap();
        for (x, y) in forms.lambda_pos.iter().chain(&forms.mu_pos).zip(turned.lambda_pos.iter().chain(&turned.mu_pos)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn maslov_scales_with_n(seed in any::<u64>(), n in 1usize..=6) {
        let curve = random_curve(&mut rng(seed)).unwrap();
        prop_assert_eq!(
            maslov_index_diagonal(&curve, n).unwrap(),
            n as i64 * maslov_index_diagonal(&curve, 1).unwrap()
        );
    }

    #[test]
    fn residual_jacobian_matches_finite_differences(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let curve = random_curve(&mut r).unwrap();
        let q = random_config(&mut r, n).unwrap();
        let t: Vec<f64> = (0..n).map(|_| r.random_range(0.0..TAU)).collect();
        let s: Vec<f64> = (0..n).map(|_| r.random_range(0.0..TAU)).collect();
        let (_, jac) = residual_system(&curve, &q, &t, &s).unwrap();
        let h = 1e-6;
        for col in 0..2 * n {
            let bump = |d: f64| {
                let (mut tt, mut ss) = (t.clone(), s.clone());
                if col < n { tt[col] += d } else { ss[col - n] += d }
                residual_system(&curve, &q, &tt, &ss).unwrap().0
            };
            let (plus, minus) = (bump(h), bump(-h));
            for j in 0..n {
                let fd = (plus[j] - minus[j]) / (2.0 * h);
                prop_assert!((fd.re - jac[(2 * j, col)]).abs() < 1e-5);
                prop_assert!((fd.im - jac[(2 * j + 1, col)]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn residual_vanishes_on_diagonal(seed in any::<u64>(), n in 2usize..=6, tau in 0.0..TAU) {
        let mut r = rng(seed);
        let curve = random_curve(&mut r).unwrap();
        let q = random_config(&mut r, n).unwrap();
        let diag = vec![tau; n];
        let (g, jac) = residual_system(&curve, &q, &diag, &diag).unwrap();
        prop_assert!(g.iter().all(|z| z.norm() < 1e-12));
        let sv = DMatrix::from_fn(2 * n, 2 * n, |i, j| jac[(i, j)]).singular_values();
        prop_assert!(sv.min() < 1e-7);
    }

    #[test]
    fn cassini_plant_is_recovered(r1 in complex(), r2 in complex(), level in 0.5..3.0f64, phase in 0.0..TAU) {
        prop_assume!((r1 - r2).norm() > 0.2);
        // (z - r1)(z - r2) = level e^{i phi}: pick one root per phi
        let (s, p) = (r1 + r2, r1 * r2);
        let points: Vec<Complex64> = (0..6)
            .map(|k| {
                let w = Complex64::from_polar(level, phase + k as f64 * TAU / 6.0);
                (s + (s * s - 4.0 * (p - w)).sqrt()) / 2.0
            })
            .collect();
        prop_assume!((0..6).all(|i| (i + 1..6).all(|j| (points[i] - points[j]).norm() > 1e-3)));
        let fit = fit_cassini(&points).unwrap().expect("planted oval");
        let (a, b) = fit.foci;
        let err = ((a - r1).norm().max((b - r2).norm())).min((a - r2).norm().max((b - r1).norm()));
        prop_assert!(err < 1e-6, "foci error {}", err);
        prop_assert!((fit.level - level).abs() < 1e-6 * level.max(1.0));
        for z in &points {
            prop_assert!((fit.inscription.eval(*z).norm() - 1.0).abs() < 1e-6);
        }
    }
}

fn check_report_invariants(curve: &JordanCurve, q: &PointConfig, seed: u64) {
    let report = find_inscriptions(curve, q, &SolveOptions::with_starts(300, seed)).unwrap();
    assert_eq!(report.n_starts, 300);
    assert!(report.n_converged <= report.n_starts);
    for ins in &report.inscriptions {
        assert!(ins.residual < ACCEPT_TOL);
        assert_eq!(ins.constant, ins.poly.is_constant());
        for (z, t) in ev(&ins.poly, q.alpha()).iter().zip(&ins.t_params) {
            assert!((z - curve.eval(*t)).norm() < ACCEPT_TOL);
        }
        for (z, s) in ev(&ins.poly, q.beta()).iter().zip(&ins.s_params) {
            assert!((z - curve.eval(*s)).norm() < ACCEPT_TOL);
        }
    }
    for (i, a) in report.inscriptions.iter().enumerate() {
        for b in &report.inscriptions[i + 1..] {
            assert!(a.poly.distance(&b.poly) >= DEDUP_TOL);
        }
    }
    let again = find_inscriptions(curve, q, &SolveOptions::with_starts(300, seed)).unwrap();
    assert!(report.same_result(&again));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solve_report_invariants(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let curve = random_curve(&mut r).unwrap();
        let q = random_config(&mut r, n).unwrap();
        check_report_invariants(&curve, &q, seed);
    }
}
