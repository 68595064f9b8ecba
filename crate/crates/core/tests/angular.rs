use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use vpatch::angular::*;
use vpatch::error::NotSolvableReason;
use vpatch::Error;

/// Midpoint-rule `(1/2π) ∫ χ e^{-ikθ}` with `n` nodes.
fn brute_chi_hat(cfg: &AngularConfig, k: i64, n: usize) -> Complex64 {
    let dt = TAU / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let t = (j as f64 + 0.5) * dt;
        acc += cfg.chi(t) * Complex64::from_polar(1.0, -(k as f64) * t);
    }
    acc * dt / TAU
}

/// Piecewise closed-form solution of `-f'' - 4f = χ`: on each arc of constant
/// `χ`, `f = -χ/4 + α cos 2θ + β sin 2θ`, glued `C¹` across the jumps.
/// Integrates from `(f(t0), f'(t0))` to `t1 > t0`.
fn shoot(cfg: &AngularConfig, t0: f64, f0: f64, d0: f64, t1: f64) -> f64 {
    let mut cuts: Vec<f64> = Vec::new();
    for &(s, e) in &cfg.arcs {
        for base in [-TAU, 0.0, TAU, 2.0 * TAU] {
            for c in [s + base, e + base] {
                if c > t0 && c < t1 {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.push(t1);
    let (mut t, mut f, mut d) = (t0, f0, d0);
    for c in cuts {
        let mid = 0.5 * (t + c);
        let p = -cfg.chi(mid) / 4.0;
        // f - p = a cos 2(θ - t) + b sin 2(θ - t)
        let a = f - p;
        let b = d / 2.0;
        let (s, co) = (2.0 * (c - t)).sin_cos();
        f = p + a * co + b * s;
        d = -2.0 * a * s + 2.0 * b * co;
        t = c;
    }
    f
}

#[test]
fn chi_hat_examples() {
    let w = 0.2;
    let t1 = 1.3;
    let c = AngularConfig::single(w, t1).unwrap();
    assert!((chi_hat(&c, 0).re - (t1 - 4.0 * w * PI) / TAU).abs() < 1e-15);
    let half = AngularConfig::single(w, PI).unwrap();
    assert!(chi_hat(&half, 2).norm() < 1e-16);
    let quarter = AngularConfig::single(w, PI / 2.0).unwrap();
    let expect = Complex64::new(0.0, -1.0 / TAU);
    assert!((chi_hat(&quarter, 2) - expect).norm() < 1e-16);
}

#[test]
fn kernel_test_agrees_with_brute_force_quadrature() {
    for k in 1..=62 {
        let t1 = 0.1 * k as f64;
        let cfg = AngularConfig::single(0.3, t1).unwrap();
        let exact = chi_hat(&cfg, 2);
        let brute = brute_chi_hat(&cfg, 2, 100_000);
        assert!((exact - brute).norm() < 1e-4, "θ₁={t1}");
        let obstructed = matches!(solve(&cfg, 64, &[]), Err(Error::NotSolvable(NotSolvableReason::KernelObstruction)));
        assert_eq!(obstructed, brute.norm() > 1e-4, "θ₁={t1}");
        assert!(obstructed, "θ₁={t1}");
    }
    for t1 in [PI, TAU] {
        let cfg = AngularConfig::single(0.3, t1).unwrap();
        assert!(solve(&cfg, 64, &[]).is_ok());
        assert!(brute_chi_hat(&cfg, 2, 100_000).norm() < 1e-4);
    }
}

#[test]
fn degenerate_single_arc_closed_forms() {
    let w = 0.25;
    let empty = AngularConfig::single(w, 0.0).unwrap();
    let p = solve(&empty, 64, &[Constraint::value(0.0, 0.0), Constraint::derivative(0.0, 0.0)]).unwrap();
    let full = AngularConfig::single(w, TAU).unwrap();
    let q = solve(&full, 64, &[Constraint::value(TAU, 0.0), Constraint::derivative(TAU, 0.0)]).unwrap();
    for j in 0..200 {
        let t = TAU * j as f64 / 200.0;
        assert!((p.eval(t) - 0.125 * (1.0 - (2.0 * t).cos())).abs() < 1e-10);
        assert!((q.eval(t) + (1.0 - 2.0 * w) / 4.0 * (1.0 - (2.0 * t).cos())).abs() < 1e-10);
    }
    assert!(p.ode_residual(0.0) < 1e-10 && q.ode_residual(0.0) < 1e-10);
}

#[test]
fn series_solution_matches_piecewise_shooting() {
    let arcs: Vec<(f64, f64)> = (0..3).map(|j| (0.4 + j as f64 * TAU / 3.0, 1.1 + j as f64 * TAU / 3.0)).collect();
    let cfg = AngularConfig::new(0.17, arcs).unwrap();
    assert!(chi_hat(&cfg, 2).norm() < 1e-12);
    let p = solve(&cfg, 1024, &[Constraint::value(0.4, 0.0), Constraint::derivative(3.0, 0.1)]).unwrap();
    assert!(p.eval(0.4).abs() < 1e-8);
    let (f0, d0) = (p.eval(0.0), p.derivative(0.0));
    for t in [0.3, 1.0, 2.0, 3.5, 5.0, TAU] {
        let s = shoot(&cfg, 0.0, f0, d0, t);
        assert!((s - p.eval(t)).abs() < 1e-5, "θ={t}: {s} vs {}", p.eval(t));
    }
}

#[test]
fn ode_residual_decays_with_truncation() {
    let cfg = AngularConfig::new(0.31, vec![(0.7, 0.7 + PI)]).unwrap();
    let r128 = solve(&cfg, 128, &[]).unwrap().ode_residual(0.2);
    let r512 = solve(&cfg, 512, &[]).unwrap().ode_residual(0.2);
    // truncated step series: error about 1/(πK·margin) away from the jumps
    assert!(r128 <= 2.0 / 128.0, "{r128}");
    assert!(r512 <= 2.0 / 512.0, "{r512}");
    assert!(r512 < 0.5 * r128);
}

#[test]
fn constraint_handling() {
    let cfg = AngularConfig::single(0.25, PI).unwrap();
    let five = [Constraint::value(0.0, 0.0); 5];
    assert!(matches!(solve(&cfg, 64, &five), Err(Error::InvalidConstraints(_))));
    let clash = [Constraint::value(0.0, 0.0), Constraint::value(0.0, 1.0)];
    assert!(matches!(solve(&cfg, 64, &clash), Err(Error::NotSolvable(NotSolvableReason::BoundaryMismatch))));
    // redundant but consistent: f(0) = f(π) = 0 pins A only
    let ok = solve(&cfg, 256, &[Constraint::value(0.0, 0.0), Constraint::value(PI, 0.0)]).unwrap();
    assert!(ok.eval(0.0).abs() < 1e-12 && ok.eval(PI).abs() < 1e-12);
    assert!(matches!(solve(&cfg, 32, &[]), Err(Error::InvalidParameter(_))));
}

#[test]
fn half_plane_exclusion() {
    for w in [0.05, 0.15, 0.25, 0.35, 0.45] {
        let wit = theta_pi_exclusion_witness(w, 256).unwrap();
        assert!(wit.excluded && wit.min_violation > 0.0, "Ω={w}: {}", wit.min_violation);
        assert!(wit.deep_negative_at_zero);
        assert_eq!(wit.samples.len(), 201);
    }
    let wit = theta_pi_exclusion_witness(0.25, 256).unwrap();
    let zero = wit.samples.iter().find(|s| s.b2 == 0.0).unwrap();
    // with B₂ = 0 the profile is -((1-2Ω)/4)(1 - cos 2θ), minimum -(1-2Ω)/2 at π/2
    assert!((zero.min_f + 0.25).abs() < 1e-6, "{}", zero.min_f);
    let b03 = wit.samples.iter().find(|s| (s.b2 - 0.3).abs() < 1e-12).unwrap();
    assert!(b03.sign_change);
    for w in [0.1, 0.25, 0.49] {
        assert_eq!(admissible_single_angles(w).unwrap(), vec![0.0, TAU]);
    }
    assert!(matches!(admissible_single_angles(0.5), Err(Error::InvalidOmega(_))));
}

#[test]
fn nfold_transform() {
    assert_eq!(nfold_chi_hat(3, 0.1, 0.9, 0.2, 2).unwrap(), Complex64::new(0.0, 0.0));
    for k in [1, 2, 3, 5, 6, 7] {
        assert_eq!(nfold_chi_hat(4, 0.2, 1.0, 0.2, k).unwrap().norm(), 0.0);
    }
    let single = AngularConfig::new(0.2, vec![(0.0, PI / 4.0)]).unwrap();
    let two = nfold_chi_hat(2, 0.0, PI / 4.0, 0.2, 2).unwrap();
    assert!((two - 2.0 * chi_hat(&single, 2)).norm() < 1e-15);
    assert!(two.norm() > 0.1);
    let four = nfold_chi_hat(4, 0.1, 0.5, 0.2, 8).unwrap();
    let arcs: Vec<(f64, f64)> = (0..4).map(|j| (0.1 + j as f64 * PI / 2.0, 0.5 + j as f64 * PI / 2.0)).collect();
    let direct = chi_hat(&AngularConfig::new(0.2, arcs).unwrap(), 8);
    assert!(four.norm() > 1e-3 && (four - direct).norm() < 1e-14);
    assert!(matches!(nfold_chi_hat(1, 0.0, 1.0, 0.2, 1), Err(Error::InvalidFold(1))));
}

#[test]
fn touching_only_for_pairs() {
    for n in 2..=8 {
        assert_eq!(nfold_touching_possible(n).unwrap(), n == 2, "N={n}");
    }
    assert!(matches!(nfold_touching_possible(1), Err(Error::InvalidFold(1))));
}

#[test]
fn corner_angles() {
    let t = nfold_corner_angle(0.25, 4).unwrap();
    assert!((t - PI / 4.0).abs() < 1e-10);
    let t = nfold_corner_angle(1e-6, 4).unwrap();
    assert!((PI / 2.0 - t - PI / 2.0).abs() < 1e-2);
    // independent bracketing root finder (scipy brentq, xtol 1e-16)
    let t = nfold_corner_angle(0.1, 3).unwrap();
    assert!((t - 0.7739972691276115).abs() < 1e-12, "{t}");
    assert!(matches!(nfold_corner_angle(0.1, 2), Err(Error::InvalidFold(2))));
}

#[test]
fn corner_angle_gives_a_vanishing_nfold_profile() {
    // the N-fold configuration with arcs (0, θ̃₂) + 2πj/N has no k = 2 content, and at the
    // matching angle its particular solution vanishes on all 2N arc endpoints
    for (w, n) in [(0.1, 3usize), (0.25, 4), (0.4, 5)] {
        let t2 = nfold_corner_angle(w, n).unwrap();
        let sector = TAU / n as f64;
        let arcs: Vec<(f64, f64)> = (0..n).map(|j| (j as f64 * sector, j as f64 * sector + t2)).collect();
        let cfg = AngularConfig::new(w, arcs).unwrap();
        let p = solve(&cfg, 2048, &[]).unwrap();
        for j in 0..n {
            let s = j as f64 * sector;
            assert!(p.eval(s).abs() < 1e-6, "Ω={w} N={n}: f={}", p.eval(s));
            assert!(p.eval(s + t2).abs() < 1e-6);
        }
        assert!(p.eval(0.5 * t2) > 0.0 && p.eval(t2 + 0.5 * (sector - t2)) < 0.0);
    }
}

#[test]
fn pair_point_touch() {
    let w = 0.25;
    let ps = pair_point_touch_profiles(w).unwrap();
    assert_eq!(ps.len(), 2);
    for p in &ps {
        assert!(p.ode_residual(0.0) <= 1e-10);
        assert!(p.reflection_defect() <= 1e-10);
    }
    assert!((ps[0].eval(PI / 2.0) + (1.0 - 2.0 * w) / 2.0).abs() < 1e-14);
    assert!((ps[1].eval(0.0) - w).abs() < 1e-14);
    assert!(ps[1].eval(PI / 2.0).abs() < 1e-14);
}

#[test]
fn segment_touch_value_is_negative() {
    for w in [0.05, 0.25, 0.45] {
        let v = pair_segment_f_at_pi(w, 1024).unwrap();
        // piecewise oracle: start from f(π/2) = 0 with the profile's slope
        let p = pair_segment_profile(w, 1024).unwrap();
        let s = shoot(&p.config, PI / 2.0, 0.0, p.derivative(PI / 2.0), PI);
        assert!((v - s).abs() < 1e-5, "{v} vs {s}");
        assert!((v - (w - 0.5)).abs() < 1e-5, "{v}");
        assert!(v < 0.0);
        assert!(p.reflection_defect() < 1e-10);
    }
}

#[test]
fn csv_and_json_export() {
    let p = pair_segment_profile(0.25, 1024).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2048);
    let j = p.to_json();
    assert_eq!(j["modes"].as_array().unwrap().len(), 2047);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_do_not_depend_on_arc_order(a in 0.0f64..1.0, b in 1.5f64..2.5, w in 0.01f64..0.49) {
        // two arcs of total length π, listed in either order
        let first = (a, a + 1.0);
        let second = (b + 1.0, b + PI);
        let x = AngularConfig::new(w, vec![first, second]).unwrap();
        let y = AngularConfig::new(w, vec![second, first]).unwrap();
        let cs = [Constraint::value(a, 0.0)];
        match (solve(&x, 64, &cs), solve(&y, 64, &cs)) {
            (Ok(p), Ok(q)) => prop_assert_eq!(p, q),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "solvability depends on order"),
        }
    }

    #[test]
    fn chi_hat_matches_quadrature(s in 0.0f64..3.0, len in 0.1f64..3.0, k in 1i64..12) {
        let cfg = AngularConfig::new(0.2, vec![(s, s + len)]).unwrap();
        let d = chi_hat(&cfg, k) - brute_chi_hat(&cfg, k, 20_000);
        prop_assert!(d.norm() < 1e-4);
    }
}
