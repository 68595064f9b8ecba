//! Blow-up rescalings, the projection onto harmonic quadratics, and the
//! classification of candidate singular boundary points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{BoxRegion, PlanarField, ScalarField, Synthetic};
use crate::geometry::Point;
use crate::weiss::{s_norm, WeissField};

/// `p(x) = (a/2)(x1² - x2²) + b x1 x2`, with Hessian `[[a, b], [b, -a]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicQuadratic {
    pub a: f64,
    pub b: f64,
}

impl HarmonicQuadratic {
    pub const ZERO: Self = Self { a: 0.0, b: 0.0 };

    pub fn eval(&self, p: Point) -> f64 {
        0.5 * self.a * (p[0] * p[0] - p[1] * p[1]) + self.b * p[0] * p[1]
    }

    /// `sup_{B₁} |p|`; in polar form `p = (ρ²/2)(a cos 2θ + b sin 2θ)`.
    pub fn sup_norm(&self) -> f64 {
        0.5 * self.a.hypot(self.b)
    }

    /// Direction (degrees, in `(-45, 45]`) of the positive lobe of `p`,
    /// i.e. `p ∝ cos 2(θ - γ)`. Defined modulo 90° as a corner orientation.
    pub fn orientation_deg(&self) -> f64 {
        wrap_quarter_turn((0.5 * self.b.atan2(self.a)).to_degrees())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a: self.a * s, b: self.b * s }
    }
}

/// Reduces an angle in degrees to `(-45, 45]`.
pub fn wrap_quarter_turn(deg: f64) -> f64 {
    let mut d = deg.rem_euclid(90.0);
    if d > 45.0 {
        d -= 90.0;
    }
    d
}

impl PlanarField for HarmonicQuadratic {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.eval(p))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        Ok([self.a * p[0] + self.b * p[1], self.b * p[0] - self.a * p[1]])
    }
}

/// A source field that can be rescaled: values, gradients and the patch indicator.
pub trait BlowupSource: WeissField {
    fn in_patch(&self, p: Point) -> Result<bool>;
}

impl BlowupSource for ScalarField {
    fn in_patch(&self, p: Point) -> Result<bool> {
        self.indicator_at(p)
    }
}

impl BlowupSource for Synthetic {
    fn in_patch(&self, p: Point) -> Result<bool> {
        Ok(self.indicator(p))
    }
}

/// `x ↦ u(x0 + r x) / scale`, evaluated lazily.
#[derive(Debug, Clone, Copy)]
pub struct Rescaled<'a, F: ?Sized> {
    pub source: &'a F,
    pub x0: Point,
    pub r: f64,
    pub scale: f64,
}

impl<'a, F: PlanarField + ?Sized> Rescaled<'a, F> {
    fn map(&self, p: Point) -> Point {
        [self.x0[0] + self.r * p[0], self.x0[1] + self.r * p[1]]
    }
}

impl<F: PlanarField + ?Sized> PlanarField for Rescaled<'_, F> {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.source.value(self.map(p))? / self.scale)
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        let g = self.source.gradient(self.map(p))?;
        let f = self.r / self.scale;
        Ok([g[0] * f, g[1] * f])
    }
}

/// Ghost cells added around `[-1, 1]²` in rescaled grids, so that the unit
/// circle stays inside the interpolation region.
const GHOST: usize = 2;

fn sample_rescaled<F: BlowupSource + ?Sized>(src: &F, x0: Point, r: f64, m: usize, scale: f64) -> Result<ScalarField> {
    if m < 8 {
        return Err(Error::InvalidParameter(format!("rescaled grid needs at least 8 cells across, got {m}")));
    }
    let h = 2.0 / m as f64;
    let ext = 1.0 + GHOST as f64 * h;
    let bx = BoxRegion::square(ext)?;
    let n = m + 2 * GHOST;
    let mut values = Vec::with_capacity(n * n);
    let mut indicator = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = [-ext + (i as f64 + 0.5) * h, -ext + (j as f64 + 0.5) * h];
            let q = [x0[0] + r * p[0], x0[1] + r * p[1]];
            values.push(src.value(q)? / scale);
            indicator.push(src.in_patch(q)?);
        }
    }
    Ok(ScalarField { origin: [bx.xmin, bx.ymin], h, nx: n, ny: n, omega: src.omega(), values, indicator })
}

fn check_rescale<F: BlowupSource + ?Sized>(src: &F, x0: Point, r: f64, resolution: Option<f64>) -> Result<()> {
    if let Some(h) = resolution {
        if r < 8.0 * h {
            return Err(Error::InvalidParameter(format!("rescaling radius {r} is below eight grid cells")));
        }
    }
    src.check_ball(x0, r)
}

/// Grid spacing of a sampled source, if any.
pub trait Resolution {
    fn resolution(&self) -> Option<f64>;
}

impl Resolution for ScalarField {
    fn resolution(&self) -> Option<f64> {
        Some(self.h)
    }
}

impl Resolution for Synthetic {
    fn resolution(&self) -> Option<f64> {
        None
    }
}

/// `u(x0 + r x) / r²` on an `m`-cell grid over `[-1, 1]²` (plus ghost cells).
pub fn rescale_characteristic<F: BlowupSource + Resolution + ?Sized>(src: &F, x0: Point, r: f64, m: usize) -> Result<ScalarField> {
    check_rescale(src, x0, r, src.resolution())?;
    sample_rescaled(src, x0, r, m, r * r)
}

/// Normalizations below this are treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// `u(x0 + r x) / S(x0, r)`, which has unit `L²(∂B₁)` norm.
pub fn rescale_supercharacteristic<F: BlowupSource + Resolution + ?Sized>(
    src: &F,
    x0: Point,
    r: f64,
    m: usize,
) -> Result<ScalarField> {
    check_rescale(src, x0, r, src.resolution())?;
    let s = s_norm(src, x0, r)?;
    if !(s > DEGENERATE_NORM) {
        return Err(Error::DegenerateNormalization(format!("S(x0, {r}) = {s:e}")));
    }
    sample_rescaled(src, x0, r, m, s)
}

/// Nodes of the trapezoid rule on the unit circle used by the projection.
pub const PROJECTION_NODES: usize = 1024;

/// Minimizer of `∫_{B₁} |D²v - D²p|²` over harmonic quadratics `p`.
///
/// The closed form `a = (1/2π) ∫ (v₁₁ - v₂₂)`, `b = (1/π) ∫ v₁₂` is converted
/// by the divergence theorem into fluxes of `∇v` through the unit circle,
/// so only first derivatives on `∂B₁` are needed.
pub fn harmonic_projection<F: PlanarField + ?Sized>(v: &F) -> Result<HarmonicQuadratic> {
    harmonic_projection_with(v, PROJECTION_NODES)
}

pub fn harmonic_projection_with<F: PlanarField + ?Sized>(v: &F, nodes: usize) -> Result<HarmonicQuadratic> {
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..nodes {
        let t = 2.0 * PI * j as f64 / nodes as f64;
        let (s, c) = t.sin_cos();
        let g = v.gradient([c, s])?;
        a += g[0] * c - g[1] * s;
        b += g[0] * s + g[1] * c;
    }
    // (1/2π) · (2π/N) Σ
    let w = 1.0 / nodes as f64;
    Ok(HarmonicQuadratic { a: a * w, b: b * w })
}

/// `τ = sup_{B₁}|Π(v)|` and the normalized direction `Π(v)/τ` (if `τ > 0`).
pub fn tau<F: PlanarField + ?Sized>(v: &F) -> Result<(f64, Option<HarmonicQuadratic>)> {
    let p = harmonic_projection(v)?;
    let t = p.sup_norm();
    Ok((t, (t > 0.0).then(|| p.scaled(1.0 / t))))
}

/// Fraction of cell centers in `B_r(x0)` that lie in the patch.
pub fn density(field: &ScalarField, x0: Point, r: f64) -> Result<f64> {
    let (inside, total, _) = indicator_stats(field, x0, r)?;
    Ok(inside as f64 / total as f64)
}

/// Counts and second moments of patch cells (and complement cells) in a ball.
struct Moments {
    m: [f64; 3],
    count: usize,
}

fn indicator_stats(field: &ScalarField, x0: Point, r: f64) -> Result<(usize, usize, [Moments; 2])> {
    let b = field.bounds();
    if x0[0] - r < b.xmin || x0[0] + r > b.xmax || x0[1] - r < b.ymin || x0[1] + r > b.ymax {
        return Err(Error::OutOfDomain(x0[0] + r, x0[1] + r));
    }
    let h = field.h;
    let lo = |c: f64, o: f64| (((c - r - o) / h - 0.5).floor().max(0.0)) as usize;
    let hi = |c: f64, o: f64, n: usize| ((((c + r - o) / h - 0.5).ceil()) as usize).min(n - 1);
    let mut mom = [Moments { m: [0.0; 3], count: 0 }, Moments { m: [0.0; 3], count: 0 }];
    let (mut inside, mut total) = (0, 0);
    for j in lo(x0[1], field.origin[1])..=hi(x0[1], field.origin[1], field.ny) {
        for i in lo(x0[0], field.origin[0])..=hi(x0[0], field.origin[0], field.nx) {
            let p = field.node(i, j);
            let d = [p[0] - x0[0], p[1] - x0[1]];
            if d[0].hypot(d[1]) >= r {
                continue;
            }
            total += 1;
            let k = if field.inside(i, j) {
                inside += 1;
                0
            } else {
                1
            };
            mom[k].m[0] += d[0] * d[0];
            mom[k].m[1] += d[0] * d[1];
            mom[k].m[2] += d[1] * d[1];
            mom[k].count += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidParameter(format!("no grid nodes inside B_{r}")));
    }
    Ok((inside, total, mom))
}

/// Eigenvalue ratio and principal axis (degrees in `(-90, 90]`) of a second-moment matrix.
fn anisotropy(m: &[f64; 3]) -> (f64, f64) {
    let (a, b, c) = (m[0], m[1], m[2]);
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    let (l1, l2) = (0.5 * (tr + disc), 0.5 * (tr - disc));
    let ratio = if l2 > 0.0 { l1 / l2 } else { f64::INFINITY };
    (ratio, (0.5 * (2.0 * b).atan2(a - c)).to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    Corner90 { orientation_deg: f64 },
    Cusp0 { axis_deg: f64 },
    DegenerateFull,
    DegenerateEmpty,
    NotSingular,
    Unresolved,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Corner90 { .. } => "Corner90",
            Self::Cusp0 { .. } => "Cusp0",
            Self::DegenerateFull => "DegenerateFull",
            Self::DegenerateEmpty => "DegenerateEmpty",
            Self::NotSingular => "NotSingular",
            Self::Unresolved => "Unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub scales: Vec<f64>,
    /// `T(r) = S(x0, r)/r²` at each scale.
    pub growth: Vec<f64>,
    pub density: Vec<f64>,
    /// `sup_{B₁} |v - Π(v)|` for the super-characteristic rescaling `v` at each scale.
    pub residuals: Vec<f64>,
    /// `T(r_min) / T(r_max)`.
    pub growth_ratio: f64,
    /// Direction (degrees) along which the characteristic profile vanishes
    /// to second order, from the fit `c + A cos 2θ + B sin 2θ` on `∂B₁` at the
    /// finest scale.
    pub axis_deg: Option<f64>,
    pub anisotropy: Option<f64>,
    pub gradient_norm: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

impl Classification {
    pub fn orientation_deg(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Corner90 { orientation_deg } => Some(orientation_deg),
            Verdict::Cusp0 { axis_deg } => Some(axis_deg),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict.name(),
            "orientation_deg": self.orientation_deg(),
            "axis_deg": self.evidence.axis_deg,
            "scales": self.evidence.scales,
            "growth": self.evidence.growth,
            "density": self.evidence.density,
            "residuals": self.evidence.residuals,
            "growth_ratio": self.evidence.growth_ratio,
            "anisotropy": self.evidence.anisotropy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Overrides the default `|∇u(x0)|` threshold.
    pub grad_tol: Option<f64>,
    /// Overrides the default `|u(x0)|` threshold.
    pub val_tol: Option<f64>,
    /// Required increase of `T` from the coarsest to the finest scale.
    pub growth_factor: f64,
    /// Second-moment eigenvalue ratio that marks an axis-concentrated set.
    pub anisotropy_ratio: f64,
    /// Densities within this distance of 0 (or 1) count as degenerate.
    pub degenerate_band: f64,
    /// Densities within this distance of 1/4 count as corner-like.
    pub quadrant_band: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            grad_tol: None,
            val_tol: None,
            growth_factor: 4.0,
            anisotropy_ratio: 10.0,
            degenerate_band: 0.05,
            quadrant_band: 0.05,
        }
    }
}

/// Samples of the closed unit disk used for sup-norms: 33 radii × 128 angles.
fn unit_disk_samples() -> Vec<Point> {
    let mut v = vec![[0.0, 0.0]];
    for i in 1..=32 {
        let rho = i as f64 / 32.0;
        for j in 0..128 {
            let t = 2.0 * PI * j as f64 / 128.0;
            v.push([rho * t.cos(), rho * t.sin()]);
        }
    }
    v
}

fn sup_distance<F: PlanarField + ?Sized>(v: &F, p: &HarmonicQuadratic, pts: &[Point]) -> Result<f64> {
    let mut m: f64 = 0.0;
    for &x in pts {
        m = m.max((v.value(x)? - p.eval(x)).abs());
    }
    Ok(m)
}

/// Direction where `c + A cos 2θ + B sin 2θ`, fitted to `v` on `∂B₁`, is smallest.
fn profile_axis<F: PlanarField + ?Sized>(v: &F) -> Result<f64> {
    let n = 256;
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        let f = v.value([t.cos(), t.sin()])?;
        a += f * (2.0 * t).cos();
        b += f * (2.0 * t).sin();
    }
    // minimum of A cos 2θ + B sin 2θ sits at 2θ = atan2(-B, -A)
    let deg = (0.5 * (-b).atan2(-a)).to_degrees();
    Ok(if deg <= -90.0 + 1e-12 { deg + 180.0 } else { deg })
}

/// Default tolerances: `1e-3` of the field scale plus a discretization
/// allowance from the largest second difference near `x0`.
fn default_tolerances(field: &ScalarField, x0: Point, r: f64) -> Result<(f64, f64)> {
    let (mut g, mut u, mut hess): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let h = field.h;
    for j in 2..field.ny - 2 {
        for i in 2..field.nx - 2 {
            let p = field.node(i, j);
            if (p[0] - x0[0]).hypot(p[1] - x0[1]) > r {
                continue;
            }
            let gr = field.node_gradient(i, j);
            g = g.max(gr[0].hypot(gr[1]));
            u = u.max(field.at(i, j).abs());
            let dxx = field.at(i + 1, j) - 2.0 * field.at(i, j) + field.at(i - 1, j);
            let dyy = field.at(i, j + 1) - 2.0 * field.at(i, j) + field.at(i, j - 1);
            hess = hess.max(dxx.abs().max(dyy.abs()) / (h * h));
        }
    }
    Ok((1e-3 * g + 4.0 * h * hess, 1e-3 * u + h * h * hess))
}

/// Classifies `x0` from the behavior of `field` over the given scales.
pub fn classify(field: &ScalarField, x0: Point, scales: &[f64], opts: &ClassifyOptions) -> Result<Classification> {
    if scales.len() < 2 {
        return Err(Error::InvalidParameter("classification needs at least two scales".into()));
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    let (value, grad) = field.eval_with_gradient(x0)?;
    let gnorm = grad[0].hypot(grad[1]);
    let (gt, vt) = default_tolerances(field, x0, scales[0])?;
    let (gt, vt) = (opts.grad_tol.unwrap_or(gt), opts.val_tol.unwrap_or(vt));

    let mut evidence = Evidence {
        scales: scales.clone(),
        growth: Vec::new(),
        density: Vec::new(),
        residuals: Vec::new(),
        growth_ratio: f64::NAN,
        axis_deg: None,
        anisotropy: None,
        gradient_norm: gnorm,
        value,
    };
    if gnorm > gt || value.abs() > vt {
        return Ok(Classification { verdict: Verdict::NotSingular, evidence });
    }

    let pts = unit_disk_samples();
    let mut last_proj = HarmonicQuadratic::ZERO;
    let mut projections = Vec::new();
    for &r in &scales {
        check_rescale(field, x0, r, Some(field.h))?;
        let s = s_norm(field, x0, r)?;
        evidence.growth.push(s / (r * r));
        evidence.density.push(density(field, x0, r)?);
        if s > DEGENERATE_NORM {
            let v = Rescaled { source: field, x0, r, scale: s };
            let p = harmonic_projection(&v)?;
            evidence.residuals.push(sup_distance(&v, &p, &pts)?);
            last_proj = p;
        } else {
            evidence.residuals.push(f64::NAN);
        }
        projections.push(last_proj);
    }
    let finest = *scales.last().unwrap();
    let n = scales.len();
    evidence.growth_ratio = evidence.growth[n - 1] / evidence.growth[0];
    let growing = evidence.growth.windows(2).all(|w| w[1] > w[0]);
    let char_profile = Rescaled { source: field, x0, r: finest, scale: finest * finest };
    evidence.axis_deg = Some(profile_axis(&char_profile)?);

    let d = evidence.density[n - 1];
    let verdict = if growing && evidence.growth_ratio >= opts.growth_factor && last_proj.sup_norm() > 0.0 {
        Verdict::Corner90 { orientation_deg: last_proj.orientation_deg() }
    } else if d <= opts.degenerate_band || d >= 1.0 - opts.degenerate_band {
        let (_, _, mom) = indicator_stats(field, x0, finest)?;
        let side = if d <= opts.degenerate_band { &mom[0] } else { &mom[1] };
        if side.count >= 2 {
            let (ratio, axis) = anisotropy(&side.m);
            evidence.anisotropy = Some(ratio);
            if ratio >= opts.anisotropy_ratio {
                Verdict::Cusp0 { axis_deg: axis }
            } else if d <= opts.degenerate_band {
                Verdict::DegenerateEmpty
            } else {
                Verdict::DegenerateFull
            }
        } else if d <= opts.degenerate_band {
            Verdict::DegenerateEmpty
        } else {
            Verdict::DegenerateFull
        }
    } else if (d - 0.25).abs() <= opts.quadrant_band && stable_fit(&projections) {
        Verdict::Corner90 { orientation_deg: last_proj.orientation_deg() }
    } else {
        Verdict::Unresolved
    };
    Ok(Classification { verdict, evidence })
}

/// The last two projections agree to 10% of their size.
fn stable_fit(p: &[HarmonicQuadratic]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let (x, y) = (p[n - 1], p[n - 2]);
    let size = x.sup_norm().max(y.sup_norm());
    size > 0.0 && (x.a - y.a).hypot(x.b - y.b) * 0.5 <= 0.1 * size
}

/// Tolerance under which rescalings count as exact harmonic quadratics.
const EXACT_CORNER_TOL: f64 = 1e-8;

/// Sup-distance on `B₁` between `u(x0 + s x)/sup_{B_s}|u|` and the harmonic
/// projection of the finest-scale rescaling, for each scale (largest first).
///
/// Requires corner evidence: either a `Corner90` classification over the
/// given scales, or rescalings that already are harmonic quadratics.
pub fn rate_probe(field: &ScalarField, x0: Point, scales: &[f64]) -> Result<Vec<f64>> {
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    let pts = unit_disk_samples();
    let mut rescaled = Vec::new();
    for &s in &scales {
        check_rescale(field, x0, s, Some(field.h))?;
        let mut m: f64 = 0.0;
        for &x in &pts {
            m = m.max(field.value([x0[0] + s * x[0], x0[1] + s * x[1]])?.abs());
        }
        if !(m > DEGENERATE_NORM) {
            return Err(Error::DegenerateNormalization(format!("sup of |u| on B_{s} is {m:e}")));
        }
        rescaled.push(Rescaled { source: field, x0, r: s, scale: m });
    }
    let exact = rescaled.iter().try_fold(true, |ok, v| -> Result<bool> {
        let p = harmonic_projection(v)?;
        Ok(ok && p.sup_norm() > 0.0 && sup_distance(v, &p, &pts)? <= EXACT_CORNER_TOL)
    })?;
    if !exact {
        let c = classify(field, x0, &scales, &ClassifyOptions::default())?;
        if !matches!(c.verdict, Verdict::Corner90 { .. }) {
            return Err(Error::NoCornerEvidence(format!("classification is {}", c.verdict.name())));
        }
    }
    let p = harmonic_projection(rescaled.last().unwrap())?;
    rescaled.iter().map(|v| sup_distance(v, &p, &pts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Poly(fn(Point) -> f64, fn(Point) -> Point);

    impl PlanarField for Poly {
        fn value(&self, p: Point) -> Result<f64> {
            Ok((self.0)(p))
        }
        fn gradient(&self, p: Point) -> Result<Point> {
            Ok((self.1)(p))
        }
    }

    #[test]
    fn projection_examples() {
        let saddle = Poly(|p| p[0] * p[0] - p[1] * p[1], |p| [2.0 * p[0], -2.0 * p[1]]);
        let q = harmonic_projection(&saddle).unwrap();
        assert_relative_eq!(q.a, 2.0, epsilon = 1e-14);
        assert!(q.b.abs() < 1e-14);
        let radial = Poly(|p| p[0] * p[0] + p[1] * p[1], |p| [2.0 * p[0], 2.0 * p[1]]);
        let q = harmonic_projection(&radial).unwrap();
        assert!(q.a.abs() < 1e-14 && q.b.abs() < 1e-14);
        let quartic = Poly(|p| p[0].powi(4), |p| [4.0 * p[0].powi(3), 0.0]);
        let q = harmonic_projection(&quartic).unwrap();
        assert_relative_eq!(q.a, 1.5, epsilon = 1e-14);
        assert!(q.b.abs() < 1e-14);
    }

    #[test]
    fn projection_is_idempotent() {
        let p = HarmonicQuadratic { a: 0.7, b: -1.3 };
        let q = harmonic_projection(&p).unwrap();
        assert_relative_eq!(q.a, p.a, epsilon = 1e-12);
        assert_relative_eq!(q.b, p.b, epsilon = 1e-12);
    }

    #[test]
    fn tau_examples() {
        let (t, p) = tau(&HarmonicQuadratic { a: 2.0, b: 0.0 }).unwrap();
        assert_relative_eq!(t, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.unwrap().a, 2.0, epsilon = 1e-14);
        let cross = Poly(|p| 3.0 * p[0] * p[1], |p| [3.0 * p[1], 3.0 * p[0]]);
        let (t, p) = tau(&cross).unwrap();
        assert_relative_eq!(t, 1.5, epsilon = 1e-14);
        assert_relative_eq!(p.unwrap().b, 2.0, epsilon = 1e-14);
        let radial = Poly(|p| p[0] * p[0] + p[1] * p[1], |p| [2.0 * p[0], 2.0 * p[1]]);
        assert!(tau(&radial).unwrap().0 < 1e-14);
    }

    #[test]
    fn sup_norm_matches_sampling() {
        let p = HarmonicQuadratic { a: 0.3, b: -0.8 };
        let m = unit_disk_samples().iter().fold(0.0f64, |m, x| m.max(p.eval(*x).abs()));
        let mut fine: f64 = 0.0;
        for j in 0..200_000 {
            let t = 2.0 * PI * j as f64 / 200_000.0;
            fine = fine.max(p.eval([t.cos(), t.sin()]).abs());
        }
        assert!(m <= p.sup_norm() + 1e-15);
        assert_relative_eq!(fine, p.sup_norm(), epsilon = 1e-10);
    }

    #[test]
    fn orientation_wraps_to_quarter_turn() {
        assert_relative_eq!(wrap_quarter_turn(89.7), -0.3, epsilon = 1e-12);
        assert_relative_eq!(wrap_quarter_turn(-46.0), 44.0, epsilon = 1e-12);
        assert_relative_eq!(HarmonicQuadratic { a: 0.0, b: 1.0 }.orientation_deg(), 45.0, epsilon = 1e-12);
    }

    #[test]
    fn anisotropy_of_a_thin_strip() {
        let (ratio, axis) = anisotropy(&[10.0, 0.0, 0.01]);
        assert!(ratio > 100.0);
        assert!(axis.abs() < 1e-12);
    }
}
