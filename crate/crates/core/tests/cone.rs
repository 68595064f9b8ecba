use std::f64::consts::PI;

use vpatch::cone::{poisson_comparison, ConePotential};
use vpatch::BoxRegion;

#[test]
fn resonant_coefficients_and_constant_mode() {
    for w in [0.0, 0.1, 0.25, 0.4] {
        let z = ConePotential::build(w, 512).unwrap();
        assert_eq!(z.log_a, 0.0);
        assert!((z.log_b + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((z.phi.c0 + (0.25 - 2.0 * w) / 4.0).abs() < 1e-15);
    }
    assert!(ConePotential::build(0.5, 512).is_err());
    assert!(ConePotential::build(0.2, 64).is_err());
}

#[test]
fn value_and_gradient_vanish_at_origin() {
    let z = ConePotential::build(0.25, 512).unwrap();
    assert_eq!(z.eval([0.0, 0.0]), 0.0);
    assert_eq!(z.grad([0.0, 0.0]), [0.0, 0.0]);
    // r² log r decay of the gradient near the vertex
    let g = z.grad([1e-6, 2e-6]);
    assert!(g[0].hypot(g[1]) < 1e-4);
}

#[test]
fn gradient_matches_finite_differences() {
    let z = ConePotential::build(0.3, 256).unwrap();
    let h = 1e-6;
    for p in [[0.3, 0.4], [-0.7, 0.2], [0.5, -0.9], [-0.2, -0.3]] {
        let g = z.grad(p);
        let fx = (z.eval([p[0] + h, p[1]]) - z.eval([p[0] - h, p[1]])) / (2.0 * h);
        let fy = (z.eval([p[0], p[1] + h]) - z.eval([p[0], p[1] - h])) / (2.0 * h);
        assert!((g[0] - fx).abs() < 1e-7 && (g[1] - fy).abs() < 1e-7, "{g:?} vs {fx} {fy}");
    }
}

#[test]
fn scaling_identity_and_symmetry() {
    let z = ConePotential::build(0.25, 512).unwrap();
    let x = [0.3, 0.4];
    let lhs = z.eval([0.15, 0.2]) / 0.25 - z.eval(x);
    let rhs = 2.0 * z.log_b * 0.5f64.ln() * 0.3 * 0.4;
    assert!((lhs - rhs).abs() < 1e-12);
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..100 {
        let x = [2.0 * next() - 1.0, 2.0 * next() - 1.0];
        let s = 0.01 + 0.99 * next();
        assert!(z.scaling_defect(x, s).abs() < 1e-12);
        assert!((z.eval(x) - z.eval([x[1], x[0]])).abs() < 1e-10);
    }
}

#[test]
fn laplacian_residual_is_small() {
    let h = 1.0 / 256.0;
    let bx = BoxRegion::square(1.0).unwrap();
    for w in [0.25, 0.0] {
        let z = ConePotential::build(w, 512).unwrap();
        let r = z.laplacian_residual(&bx, h, 4.0 * h).unwrap();
        assert!(r <= 5e-2, "Ω={w}: {r}");
    }
    let z = ConePotential::build(0.25, 512).unwrap();
    let r = z.point_residual([0.3, 0.35], 1.0 / 1024.0);
    assert!(r <= 5e-3, "{r}");
}

#[test]
fn projections_follow_the_scaling_law() {
    let z = ConePotential::build(0.25, 512).unwrap();
    let p1 = z.projection_report(1.0).unwrap();
    assert!(p1.pi.a.abs() < 1e-8 && p1.pi.b.abs() < 1e-8 && p1.tau < 1e-8, "{p1:?}");
    let half = z.projection_report(0.5).unwrap();
    let expect = -2.0 * z.log_b * 2f64.ln();
    assert!((half.pi.b - expect).abs() < 1e-10, "{half:?}");
    assert!((expect - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
    assert!(half.pi.a.abs() < 1e-10);
    assert!((half.tau - 0.5 * expect).abs() < 1e-10);
    let quarter = z.projection_report(0.25).unwrap();
    assert!((quarter.tau - 2.0 * half.tau).abs() < 1e-9);
    let taus: Vec<f64> = [1.0, 0.5, 0.25, 0.125].iter().map(|&s| z.projection_report(s).unwrap().tau).collect();
    assert!(taus.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn grid_poisson_solve_agrees() {
    let z = ConePotential::build(0.25, 512).unwrap();
    let d = poisson_comparison(&z, 4.0, 1.0 / 64.0).unwrap();
    assert!(d <= 5e-3, "{d}");
}
