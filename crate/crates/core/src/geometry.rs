//! Patch boundaries: simple closed curves (or an annulus) bounding the vortex region.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Points closer than this to the boundary count as outside.
pub const BOUNDARY_TIE: f64 = 1e-12;

/// Largest number of Fourier modes accepted for a polar-graph boundary.
pub const MAX_FOURIER_MODES: usize = 256;

/// Star-shaped boundary `r(θ) = R0 (1 + Σ a_k cos kθ + b_k sin kθ)` around `center`.
///
/// `cos[j]` and `sin[j]` hold the coefficients of mode `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBoundary {
    pub r0: f64,
    pub center: Point,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierBoundary {
    pub fn new(r0: f64, center: Point, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let f = Self { r0, center, cos, sin };
        f.validate()?;
        Ok(f)
    }

    pub fn modes(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 > 0.0) {
            return Err(Error::InvalidGeometry(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::InvalidGeometry("center must be finite".into()));
        }
        if self.modes() > MAX_FOURIER_MODES {
            return Err(Error::InvalidGeometry(format!(
                "{} Fourier modes exceed the limit {MAX_FOURIER_MODES}",
                self.modes()
            )));
        }
        if self.cos.iter().chain(&self.sin).any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite Fourier coefficient".into()));
        }
        let l1: f64 = self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum();
        if l1 < 1.0 {
            return Ok(());
        }
        // A polar graph with r > 0 everywhere is automatically a simple curve.
        let n = 16 * self.modes().max(8) + 64;
        let min = (0..n)
            .map(|i| self.relative_radius(2.0 * PI * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        if min <= 1e-9 {
            return Err(Error::InvalidGeometry(format!(
                "radius function reaches {min:e}; the curve is not a simple star-shaped graph"
            )));
        }
        Ok(())
    }

    /// `r(θ) / R0`.
    pub fn relative_radius(&self, theta: f64) -> f64 {
        let mut s = 1.0;
        for (k, a) in self.cos.iter().enumerate() {
            s += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            s += b * ((k + 1) as f64 * theta).sin();
        }
        s
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.r0 * self.relative_radius(theta)
    }

    /// `(r(θ), r'(θ))`.
    pub fn radius_and_derivative(&self, theta: f64) -> (f64, f64) {
        let mut r = 1.0;
        let mut dr = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let kk = (k + 1) as f64;
            let (s, c) = (kk * theta).sin_cos();
            r += a * c;
            dr -= a * kk * s;
        }
        for (k, b) in self.sin.iter().enumerate() {
            let kk = (k + 1) as f64;
            let (s, c) = (kk * theta).sin_cos();
            r += b * s;
            dr += b * kk * c;
        }
        (self.r0 * r, self.r0 * dr)
    }

    fn area(&self) -> f64 {
        let n = (8 * self.modes()).max(64);
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| 0.5 * self.radius(i as f64 * h).powi(2)).sum::<f64>() * h
    }
}

/// Boundary of the patch region.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchBoundary {
    /// Disk of radius `r` centered at the origin.
    Disk { r: f64 },
    /// Annulus `b < |x| < 1`.
    Annulus { b: f64 },
    /// Axis-aligned ellipse with semi-axes `a ≥ b > 0`.
    Ellipse { a: f64, b: f64 },
    Fourier(FourierBoundary),
}

/// A quadrature node on a boundary curve parametrized by `t ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub point: Point,
    /// Derivative of the point with respect to the curve parameter.
    pub tangent: Point,
    /// Second derivative with respect to the curve parameter.
    pub curvature_vector: Point,
}

impl BoundaryNode {
    /// Outward normal scaled by the parametric speed, `(y2', -y1')`.
    pub fn scaled_normal(&self) -> Point {
        [self.tangent[1], -self.tangent[0]]
    }
}

impl PatchBoundary {
    pub fn disk(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidGeometry(format!("disk radius must be positive, got {r}")));
        }
        Ok(Self::Disk { r })
    }

    pub fn annulus(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0 && b < 1.0) {
            return Err(Error::InvalidGeometry(format!("annulus inner radius must lie in (0, 1), got {b}")));
        }
        Ok(Self::Annulus { b })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= b && b > 0.0) {
            return Err(Error::InvalidGeometry(format!("ellipse needs a >= b > 0, got a={a}, b={b}")));
        }
        Ok(Self::Ellipse { a, b })
    }

    pub fn fourier(r0: f64, center: Point, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Ok(Self::Fourier(FourierBoundary::new(r0, center, cos, sin)?))
    }

    /// Membership test; points within [`BOUNDARY_TIE`] of the boundary are outside.
    pub fn contains(&self, p: Point) -> bool {
        let rho = p[0].hypot(p[1]);
        match self {
            Self::Disk { r } => rho < r - BOUNDARY_TIE,
            Self::Annulus { b } => rho < 1.0 - BOUNDARY_TIE && rho > b + BOUNDARY_TIE,
            Self::Ellipse { a, b } => {
                let f = (p[0] / a).powi(2) + (p[1] / b).powi(2) - 1.0;
                let g = 2.0 * (p[0] / (a * a)).hypot(p[1] / (b * b));
                // first-order distance to the level set, exact enough near the curve
                f < 0.0 && (g == 0.0 || -f / g > BOUNDARY_TIE)
            }
            Self::Fourier(fb) => {
                let dx = p[0] - fb.center[0];
                let dy = p[1] - fb.center[1];
                let rho = dx.hypot(dy);
                let (r, dr) = fb.radius_and_derivative(dy.atan2(dx));
                let dist = (r - rho) * r / r.hypot(dr);
                dist > BOUNDARY_TIE
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Self::Disk { r } => PI * r * r,
            Self::Annulus { b } => PI * (1.0 - b * b),
            Self::Ellipse { a, b } => PI * a * b,
            Self::Fourier(fb) => fb.area(),
        }
    }

    /// `(xmin, xmax, ymin, ymax)`; exact for the analytic shapes, sampled for Fourier.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            Self::Disk { r } => [-r, *r, -r, *r],
            Self::Annulus { .. } => [-1.0, 1.0, -1.0, 1.0],
            Self::Ellipse { a, b } => [-a, *a, -b, *b],
            Self::Fourier(fb) => {
                let n = 32 * fb.modes().max(8);
                let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for i in 0..n {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    let r = fb.radius(t);
                    let x = fb.center[0] + r * t.cos();
                    let y = fb.center[1] + r * t.sin();
                    bb = [bb[0].min(x), bb[1].max(x), bb[2].min(y), bb[3].max(y)];
                }
                bb
            }
        }
    }

    /// Diameter of the region (sampled for Fourier boundaries).
    pub fn diameter(&self) -> f64 {
        match self {
            Self::Disk { r } => 2.0 * r,
            Self::Annulus { .. } => 2.0,
            Self::Ellipse { a, .. } => 2.0 * a,
            Self::Fourier(_) => {
                let pts = self.boundary_points(512);
                let mut d: f64 = 0.0;
                for p in &pts {
                    for q in &pts {
                        d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
                    }
                }
                d
            }
        }
    }

    /// Number of boundary components (2 for the annulus).
    pub fn components(&self) -> usize {
        match self {
            Self::Annulus { .. } => 2,
            _ => 1,
        }
    }

    /// `n` points per boundary component, equispaced in the curve parameter,
    /// with unit tangents. For the annulus the outer circle comes first,
    /// followed by the inner circle traversed clockwise.
    pub fn sample_boundary(&self, n: usize) -> Vec<(Point, Point)> {
        self.boundary_nodes(n)
            .into_iter()
            .map(|b| {
                let s = b.tangent[0].hypot(b.tangent[1]);
                (b.point, [b.tangent[0] / s, b.tangent[1] / s])
            })
            .collect()
    }

    pub fn boundary_points(&self, n: usize) -> Vec<Point> {
        self.boundary_nodes(n).into_iter().map(|b| b.point).collect()
    }

    /// Quadrature nodes at `t_j = 2πj/n`, with the annulus inner circle reversed
    /// so that `scaled_normal` always points out of the region.
    pub fn boundary_nodes(&self, n: usize) -> Vec<BoundaryNode> {
        let ts = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64);
        match self {
            Self::Disk { r } => ts.map(|t| circle_node(*r, t)).collect(),
            Self::Annulus { b } => {
                let mut v: Vec<_> = ts.clone().map(|t| circle_node(1.0, t)).collect();
                v.extend(ts.map(|t| {
                    let c = circle_node(*b, -t);
                    BoundaryNode {
                        point: c.point,
                        tangent: [-c.tangent[0], -c.tangent[1]],
                        curvature_vector: c.curvature_vector,
                    }
                }));
                v
            }
            Self::Ellipse { a, b } => ts
                .map(|t| {
                    let (s, c) = t.sin_cos();
                    BoundaryNode {
                        point: [a * c, b * s],
                        tangent: [-a * s, b * c],
                        curvature_vector: [-a * c, -b * s],
                    }
                })
                .collect(),
            Self::Fourier(fb) => ts.map(|t| fourier_node(fb, t)).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Disk { r } => json!({"kind": "disk", "params": {"R": r}}),
            Self::Annulus { b } => json!({"kind": "annulus", "params": {"b": b}}),
            Self::Ellipse { a, b } => json!({"kind": "ellipse", "params": {"a": a, "b": b}}),
            Self::Fourier(fb) => json!({
                "kind": "fourier",
                "params": {"center": fb.center},
                "fourier": {"R0": fb.r0, "cos": fb.cos, "sin": fb.sin},
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidGeometry(m.to_string());
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| bad("missing `kind`"))?;
        let params = v.get("params").cloned().unwrap_or(Value::Null);
        let num = |name: &str| -> Result<f64> {
            params
                .get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| bad(&format!("missing numeric parameter `{name}`")))
        };
        match kind {
            "disk" => Self::disk(num("R")?),
            "annulus" => Self::annulus(num("b")?),
            "ellipse" => Self::ellipse(num("a")?, num("b")?),
            "fourier" => {
                let f = v.get("fourier").ok_or_else(|| bad("missing `fourier` block"))?;
                let r0 = f.get("R0").and_then(Value::as_f64).ok_or_else(|| bad("missing `R0`"))?;
                let list = |name: &str| -> Result<Vec<f64>> {
                    match f.get(name) {
                        None => Ok(Vec::new()),
                        Some(x) => serde_json::from_value(x.clone()).map_err(|e| bad(&format!("`{name}`: {e}"))),
                    }
                };
                let center = match params.get("center") {
                    None | Some(Value::Null) => [0.0, 0.0],
                    Some(c) => serde_json::from_value(c.clone()).map_err(|e| bad(&format!("`center`: {e}")))?,
                };
                Self::fourier(r0, center, list("cos")?, list("sin")?)
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

fn circle_node(r: f64, t: f64) -> BoundaryNode {
    let (s, c) = t.sin_cos();
    BoundaryNode { point: [r * c, r * s], tangent: [-r * s, r * c], curvature_vector: [-r * c, -r * s] }
}

fn fourier_node(fb: &FourierBoundary, t: f64) -> BoundaryNode {
    let mut r = 1.0;
    let mut dr = 0.0;
    let mut ddr = 0.0;
    for (k, a) in fb.cos.iter().enumerate() {
        let kk = (k + 1) as f64;
        let (s, c) = (kk * t).sin_cos();
        r += a * c;
        dr -= a * kk * s;
        ddr -= a * kk * kk * c;
    }
    for (k, b) in fb.sin.iter().enumerate() {
        let kk = (k + 1) as f64;
        let (s, c) = (kk * t).sin_cos();
        r += b * s;
        dr += b * kk * c;
        ddr -= b * kk * kk * s;
    }
    let (r, dr, ddr) = (fb.r0 * r, fb.r0 * dr, fb.r0 * ddr);
    let (s, c) = t.sin_cos();
    BoundaryNode {
        point: [fb.center[0] + r * c, fb.center[1] + r * s],
        tangent: [dr * c - r * s, dr * s + r * c],
        curvature_vector: [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s],
    }
}

/// Rotation speed `ab/(a+b)²` of the Kirchhoff ellipse with semi-axes `a`, `b`.
pub fn ellipse_angular_velocity(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidGeometry(format!("semi-axes must be positive, got a={a}, b={b}")));
    }
    Ok(a * b / (a + b).powi(2))
}

/// Fourier coefficients of a positive radius function sampled at `n` equispaced
/// angles, truncated to `modes` modes and normalized by the mean radius.
pub fn fourier_from_polar(radius: impl Fn(f64) -> f64, modes: usize, n: usize) -> Result<FourierBoundary> {
    let samples: Vec<f64> = (0..n).map(|i| radius(2.0 * PI * i as f64 / n as f64)).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut cos = vec![0.0; modes];
    let mut sin = vec![0.0; modes];
    for k in 1..=modes {
        for (i, r) in samples.iter().enumerate() {
            let (s, c) = (2.0 * PI * (k * i) as f64 / n as f64).sin_cos();
            cos[k - 1] += r * c;
            sin[k - 1] += r * s;
        }
        cos[k - 1] *= 2.0 / (n as f64 * mean);
        sin[k - 1] *= 2.0 / (n as f64 * mean);
    }
    FourierBoundary::new(mean, [0.0, 0.0], cos, sin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn analytic_areas() {
        assert_relative_eq!(PatchBoundary::disk(1.0).unwrap().area(), PI);
        assert_relative_eq!(PatchBoundary::ellipse(2.0, 1.0).unwrap().area(), 2.0 * PI);
        assert_relative_eq!(PatchBoundary::annulus(0.5).unwrap().area(), 0.75 * PI);
        let f = PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.0, 0.1], vec![]).unwrap();
        assert_relative_eq!(f.area(), 1.005 * PI, max_relative = 1e-14);
    }

    #[test]
    fn kirchhoff_speeds() {
        assert_relative_eq!(ellipse_angular_velocity(2.0, 1.0).unwrap(), 2.0 / 9.0);
        assert_relative_eq!(ellipse_angular_velocity(1.0, 1.0).unwrap(), 0.25);
        assert_relative_eq!(ellipse_angular_velocity(3.0, 1.0).unwrap(), 3.0 / 16.0);
        assert!(ellipse_angular_velocity(0.0, 1.0).is_err());
    }

    #[test]
    fn sample_points_and_tangents() {
        let d = PatchBoundary::disk(1.0).unwrap().sample_boundary(4);
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for ((p, t), e) in d.iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
            assert!((t[0] + e[1]).abs() < 1e-15 && (t[1] - e[0]).abs() < 1e-15);
        }
        let e = PatchBoundary::ellipse(2.0, 1.0).unwrap().boundary_points(4);
        assert!((e[0][0] - 2.0).abs() < 1e-15 && (e[1][1] - 1.0).abs() < 1e-15);
        assert!((e[2][0] + 2.0).abs() < 1e-15 && (e[3][1] + 1.0).abs() < 1e-15);
        let f = PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.0, 0.1], vec![]).unwrap();
        assert_relative_eq!(f.boundary_points(16)[0][0], 1.1);
    }

    #[test]
    fn tie_break_is_outside() {
        let d = PatchBoundary::disk(1.0).unwrap();
        assert!(!d.contains([1.0, 0.0]));
        assert!(d.contains([1.0 - 1e-9, 0.0]));
        let e = PatchBoundary::ellipse(2.0, 1.0).unwrap();
        assert!(!e.contains([2.0, 0.0]));
        assert!(!e.contains([0.0, 1.0]));
        assert!(e.contains([1.999, 0.0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PatchBoundary::disk(0.0).is_err());
        assert!(PatchBoundary::annulus(1.0).is_err());
        assert!(PatchBoundary::ellipse(1.0, 2.0).is_err());
        assert!(PatchBoundary::fourier(1.0, [0.0, 0.0], vec![1.2], vec![]).is_err());
        assert!(PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.0; 257], vec![]).is_err());
        // large coefficients that still keep r > 0 are accepted
        assert!(PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.6, 0.5], vec![]).is_ok());
    }

    #[test]
    fn annulus_samples_have_outward_normals() {
        let a = PatchBoundary::annulus(0.5).unwrap();
        let nodes = a.boundary_nodes(8);
        assert_eq!(nodes.len(), 16);
        for n in &nodes[..8] {
            let nu = n.scaled_normal();
            assert!(nu[0] * n.point[0] + nu[1] * n.point[1] > 0.0);
        }
        for n in &nodes[8..] {
            let nu = n.scaled_normal();
            assert!(nu[0] * n.point[0] + nu[1] * n.point[1] < 0.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let shapes = [
            PatchBoundary::disk(1.5).unwrap(),
            PatchBoundary::annulus(0.25).unwrap(),
            PatchBoundary::ellipse(2.0, 1.0).unwrap(),
            PatchBoundary::fourier(1.0, [0.1, -0.2], vec![0.0, 0.1, 0.01], vec![0.02]).unwrap(),
        ];
        for s in shapes {
            assert_eq!(PatchBoundary::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn fourier_nodes_match_finite_differences() {
        let f = PatchBoundary::fourier(1.2, [0.3, 0.1], vec![0.05, 0.1, -0.02], vec![0.03]).unwrap();
        let PatchBoundary::Fourier(fb) = &f else { unreachable!() };
        let t = 0.7;
        let e = 1e-6;
        let p = |t| fourier_node(fb, t).point;
        let n = fourier_node(fb, t);
        for c in 0..2 {
            assert_relative_eq!(n.tangent[c], (p(t + e)[c] - p(t - e)[c]) / (2.0 * e), epsilon = 1e-8);
            let fd = (p(t + e)[c] - 2.0 * p(t)[c] + p(t - e)[c]) / (e * e);
            assert_relative_eq!(n.curvature_vector[c], fd, epsilon = 1e-3);
        }
    }

    #[test]
    fn polar_fit_recovers_coefficients() {
        let fb = fourier_from_polar(|t| 2.0 * (1.0 + 0.1 * (3.0 * t).cos() - 0.05 * t.sin()), 6, 64).unwrap();
        assert_relative_eq!(fb.r0, 2.0, epsilon = 1e-14);
        assert_relative_eq!(fb.cos[2], 0.1, epsilon = 1e-14);
        assert_relative_eq!(fb.sin[0], -0.05, epsilon = 1e-14);
        assert!(fb.cos[1].abs() < 1e-14);
    }
}
