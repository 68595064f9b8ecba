use vpatch::blowup::{
    classify, density, harmonic_projection, rate_probe, rescale_characteristic, rescale_supercharacteristic, tau,
    ClassifyOptions, Verdict,
};
use vpatch::{relative_stream, BoxRegion, Error, PatchBoundary, PlanarField, Synthetic};

fn corner_grid() -> vpatch::ScalarField {
    // dyadic box and spacing keep the lattice exactly symmetric
    Synthetic::CornerLog { omega: 0.25 }.sample(&BoxRegion::square(0.625).unwrap(), 1.0 / 1024.0).unwrap()
}

#[test]
fn corner_is_classified_with_quadrant_density() {
    let f = corner_grid();
    let scales: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
    let c = classify(&f, [0.0, 0.0], &scales, &ClassifyOptions::default()).unwrap();
    let Verdict::Corner90 { orientation_deg } = c.verdict else { panic!("{c:?}") };
    assert!(orientation_deg.abs() < 1.0, "{orientation_deg}");
    for d in &c.evidence.density {
        assert!((d - 0.25).abs() <= 1e-3, "{d}");
    }
    let rates = rate_probe(&f, [0.0, 0.0], &(2..=6).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>()).unwrap();
    assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
}

#[test]
fn cusps_are_degenerate() {
    let bx = BoxRegion::square(0.625).unwrap();
    let scales: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
    let ray = Synthetic::CuspRay { omega: 0.25 }.sample(&bx, 1.0 / 512.0).unwrap();
    let c = classify(&ray, [0.0, 0.0], &scales, &ClassifyOptions::default()).unwrap();
    assert!(matches!(c.verdict, Verdict::DegenerateEmpty | Verdict::Cusp0 { .. }), "{c:?}");
    assert!(c.evidence.axis_deg.unwrap().abs() < 1e-6);
    let comp = Synthetic::CuspComplement { omega: 0.25 }.sample(&bx, 1.0 / 512.0).unwrap();
    let c = classify(&comp, [0.0, 0.0], &scales, &ClassifyOptions::default()).unwrap();
    assert!(matches!(c.verdict, Verdict::DegenerateFull | Verdict::Cusp0 { .. }), "{c:?}");
    let err = rate_probe(&ray, [0.0, 0.0], &scales).unwrap_err();
    assert!(matches!(err, Error::NoCornerEvidence(_)));
}

#[test]
fn rankine_boundary_point_is_regular() {
    let disk = PatchBoundary::disk(1.0).unwrap();
    let f = relative_stream(&disk, 0.25, &BoxRegion::square(3.0).unwrap(), 1.0 / 128.0).unwrap();
    let scales: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
    let c = classify(&f, [1.0, 0.0], &scales, &ClassifyOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::NotSingular);
    let v = rescale_characteristic(&Synthetic::Rankine { omega: 0.25 }, [1.0, 0.0], 0.1, 64).unwrap();
    let expect = Synthetic::Rankine { omega: 0.25 }.eval([1.1, 0.0]) / 0.01;
    assert!((v.eval([1.0, 0.0]).unwrap() - expect).abs() < 1e-9 * expect.abs());
}

#[test]
fn rescalings_of_homogeneous_fields() {
    let bx = BoxRegion::square(1.0).unwrap();
    let saddle = Synthetic::Saddle { scale: 1.0, omega: 0.25 }.sample(&bx, 1.0 / 128.0).unwrap();
    let v = rescale_characteristic(&saddle, [0.0, 0.0], 0.2, 64).unwrap();
    for p in [[0.3, 0.4], [-0.9, 0.1], [0.0, 1.0]] {
        assert!((v.eval(p).unwrap() - (p[0] * p[0] - p[1] * p[1])).abs() < 1e-12);
    }
    let ray = Synthetic::CuspRay { omega: 0.25 }.sample(&bx, 1.0 / 128.0).unwrap();
    let v = rescale_characteristic(&ray, [0.0, 0.0], 0.1, 64).unwrap();
    for p in [[0.3, 0.4], [-0.9, 0.1], [0.0, 1.0]] {
        assert!((v.eval(p).unwrap() - 0.25 * p[1] * p[1]).abs() < 1e-10);
    }
    let five = Synthetic::Saddle { scale: 5.0, omega: 0.25 }.sample(&bx, 1.0 / 128.0).unwrap();
    let v = rescale_supercharacteristic(&five, [0.0, 0.0], 0.2, 64).unwrap();
    let sp = std::f64::consts::PI.sqrt();
    for p in [[0.3, 0.4], [-0.9, 0.1]] {
        assert!((v.eval(p).unwrap() - (p[0] * p[0] - p[1] * p[1]) / sp).abs() < 1e-10);
    }
    let zero = Synthetic::Zero { omega: 0.25 }.sample(&bx, 1.0 / 128.0).unwrap();
    assert!(matches!(
        rescale_supercharacteristic(&zero, [0.0, 0.0], 0.2, 64),
        Err(Error::DegenerateNormalization(_))
    ));
    let (t, _) = tau(&v).unwrap();
    assert!((t - 1.0 / sp).abs() < 1e-9);
    let exact_rates = rate_probe(&saddle, [0.0, 0.0], &[0.25, 0.125, 0.0625]).unwrap();
    assert!(exact_rates.iter().all(|r| *r <= 1e-10), "{exact_rates:?}");
}

#[test]
fn corner_supercharacteristic_rescalings_converge() {
    let c = Synthetic::CornerLog { omega: 0.25 };
    let sp = std::f64::consts::PI.sqrt();
    let mut prev = f64::INFINITY;
    for k in 3..=5 {
        let r = 0.5f64.powi(k);
        let v = rescale_supercharacteristic(&c, [0.0, 0.0], r, 64).unwrap();
        let mut d: f64 = 0.0;
        for j in 0..64 {
            for i in 0..64 {
                let p = [-1.0 + (i as f64 + 0.5) / 32.0, -1.0 + (j as f64 + 0.5) / 32.0];
                if p[0].hypot(p[1]) <= 1.0 {
                    d = d.max((v.eval(p).unwrap() - (p[0] * p[0] - p[1] * p[1]) / sp).abs());
                }
            }
        }
        assert!(d < prev, "{d} !< {prev}");
        prev = d;
    }
}

#[test]
fn densities_of_simple_sets() {
    let bx = BoxRegion::square(1.0).unwrap();
    let h = 1.0 / 512.0;
    let q = vpatch::ScalarField::from_fn(&bx, h, 0.25, |_| 0.0, |p| p[0] > 0.0 && p[1] > 0.0).unwrap();
    assert!((density(&q, [0.0, 0.0], 0.5).unwrap() - 0.25).abs() < 1e-3);
    let full = vpatch::ScalarField::from_fn(&bx, h, 0.25, |_| 0.0, |_| true).unwrap();
    assert_eq!(density(&full, [0.0, 0.0], 0.5).unwrap(), 1.0);
    let half = vpatch::ScalarField::from_fn(&bx, h, 0.25, |_| 0.0, |p| p[1] > 0.0).unwrap();
    assert!((density(&half, [0.0, 0.0], 0.5).unwrap() - 0.5).abs() < 1e-3);
    assert!(density(&half, [0.0, 0.0], 1.5).is_err());
}

#[test]
fn projection_is_rotation_equivariant() {
    for deg in [15.0f64, 30.0, 45.0] {
        let g = deg.to_radians();
        let f = Rot(g);
        let p = harmonic_projection(&f).unwrap();
        let got = p.orientation_deg();
        let d = vpatch::blowup::wrap_quarter_turn(got - deg);
        assert!(d.abs() < 0.5, "{deg}: {got}");
    }
}

/// `(x1² - x2²) log(1/|x|) + 0.3|x|²` rotated by `γ`.
struct Rot(f64);

impl PlanarField for Rot {
    fn value(&self, p: Point) -> vpatch::Result<f64> {
        let (s, c) = self.0.sin_cos();
        let q = [c * p[0] + s * p[1], -s * p[0] + c * p[1]];
        Ok(Synthetic::CornerLog { omega: 0.0 }.eval(q) + 0.3 * (p[0] * p[0] + p[1] * p[1]))
    }
    fn gradient(&self, p: Point) -> vpatch::Result<Point> {
        let (s, c) = self.0.sin_cos();
        let q = [c * p[0] + s * p[1], -s * p[0] + c * p[1]];
        let g = Synthetic::CornerLog { omega: 0.0 }.grad(q);
        Ok([c * g[0] - s * g[1] + 0.6 * p[0], s * g[0] + c * g[1] + 0.6 * p[1]])
    }
}

use vpatch::Point;
