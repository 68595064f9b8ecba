use approx::assert_relative_eq;
use vpatch::field::newton::{newtonian_direct, newtonian_fft};
use vpatch::{relative_stream, BoxRegion, PatchBoundary, PlanarField, Synthetic};

fn rankine(h: f64) -> vpatch::ScalarField {
    let disk = PatchBoundary::disk(1.0).unwrap();
    relative_stream(&disk, 0.25, &BoxRegion::square(3.0).unwrap(), h).unwrap()
}

#[test]
fn rankine_matches_closed_form() {
    let f = rankine(1.0 / 128.0);
    let exact = Synthetic::Rankine { omega: 0.25 };
    assert!((f.eval([0.0, 0.0]).unwrap() - 0.125).abs() < 1e-3);
    assert!((f.eval([2.0, 0.0]).unwrap() - 0.028426409720027).abs() < 1e-3);
    assert!(f.eval([1.0, 0.0]).unwrap().abs() < 1e-3);
    let mut worst: f64 = 0.0;
    for k in 0..40 {
        let t = 0.37 * k as f64;
        let r = 0.05 * k as f64;
        let p = [r * t.cos(), r * t.sin()];
        worst = worst.max((f.eval(p).unwrap() - exact.eval(p)).abs());
    }
    assert!(worst < 1e-3, "max deviation {worst}");
    let g = f.gradient([1.0, 0.0]).unwrap();
    assert!((g[0] + 0.25).abs() < 5e-3 && g[1].abs() < 5e-3, "{g:?}");
    let g0 = f.gradient([0.0, 0.0]).unwrap();
    assert!(g0[0].abs() < 1e-10 && g0[1].abs() < 1e-10, "{g0:?}");
}

#[test]
fn discrete_laplacian_matches_source_away_from_the_boundary() {
    let h = 1.0 / 128.0;
    let f = rankine(h);
    let mut worst: f64 = 0.0;
    for j in 1..f.ny - 1 {
        for i in 1..f.nx - 1 {
            let p = f.node(i, j);
            if (p[0].hypot(p[1]) - 1.0).abs() < 3.0 * h {
                continue;
            }
            let lap = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * f.at(i, j)) / (h * h);
            worst = worst.max((-lap - f.source(i, j)).abs());
        }
    }
    let c = worst / h;
    assert!(c < 1.0, "Laplacian error constant {c}");
}

#[test]
fn far_field_and_symmetry() {
    let h = 1.0 / 64.0;
    let e = PatchBoundary::ellipse(2.0, 1.0).unwrap();
    let bx = BoxRegion::new(-6.0, 6.0, -5.0, 5.0).unwrap();
    let f = relative_stream(&e, 2.0 / 9.0, &bx, h).unwrap();
    for p in [[-5.8, -4.8], [5.8, 4.8], [-5.8, 4.8]] {
        let g = f.gradient(p).unwrap();
        let gx = [g[0] - 2.0 / 9.0 * p[0], g[1] - 2.0 / 9.0 * p[1]];
        let bound = e.area() / (2.0 * std::f64::consts::PI * p[0].hypot(p[1]));
        assert!(gx[0].hypot(gx[1]) <= 1.1 * bound);
    }
    for p in [[0.3, 0.7], [2.5, -1.3], [1.9, 0.05]] {
        let v = f.eval(p).unwrap();
        for q in [[-p[0], p[1]], [p[0], -p[1]], [-p[0], -p[1]]] {
            assert!((f.eval(q).unwrap() - v).abs() < 1e-12);
        }
    }
}

#[test]
fn fft_and_direct_paths_agree_on_a_patch() {
    let h = 1.0 / 16.0;
    let bx = BoxRegion::square(3.0).unwrap();
    let disk = PatchBoundary::ellipse(1.0, 0.6).unwrap();
    let f = vpatch::ScalarField::from_fn(&bx, h, 0.0, |_| 0.0, |p| disk.contains(p)).unwrap();
    let rho: Vec<f64> = f.indicator.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let a = newtonian_direct(f.nx, f.ny, h, &rho);
    let b = newtonian_fft(f.nx, f.ny, h, &rho);
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(*x, *y, epsilon = 1e-12);
    }
}
