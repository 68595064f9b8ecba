//! Weiss-type monotonicity functional for the planar free-boundary problem.
//!
//! For `u` with `-Δu = (1-2Ω) I_D - 2Ω I_{D^c}` and `u = 0` on `∂D`,
//!
//! ```text
//! Φ(r) = r^{-4} ∫_{B_r(x0)} (|∇u|² - 2u f) - 2 r^{-5} ∫_{∂B_r(x0)} u²
//! ```
//!
//! is nondecreasing in `r`, with
//! `Φ'(r) = 2 r^{-4} ∫_{∂B_r} (∇u·ν - 2u/r)²`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PlanarField, ScalarField, Synthetic};
use crate::geometry::Point;
use crate::quadrature::{circle_angles, composite_gauss, gauss_legendre};

/// Space dimension; the exponents below are `n + 2` and `n + 3`.
const DIM: i32 = 2;
const ENERGY_EXPONENT: i32 = DIM + 2;
const BOUNDARY_EXPONENT: i32 = DIM + 3;

/// Minimum number of angular nodes on a sphere.
const MIN_SPHERE_NODES: usize = 256;

/// A field on which the functional can be evaluated.
pub trait WeissField: PlanarField {
    fn omega(&self) -> f64;

    /// Fails unless `B_r(x0)` is a valid integration ball.
    fn check_ball(&self, x0: Point, r: f64) -> Result<()>;

    /// `∫_{B_r(x0)} (|∇u|² - 2u f)` with `f` the free-boundary source term.
    fn ball_energy(&self, x0: Point, r: f64) -> Result<f64>;

    /// Number of trapezoid nodes used on `∂B_r`.
    fn sphere_nodes(&self, r: f64) -> usize;
}

impl WeissField for ScalarField {
    fn omega(&self) -> f64 {
        self.omega
    }

    fn check_ball(&self, x0: Point, r: f64) -> Result<()> {
        if !(r > 2.0 * self.h) {
            return Err(Error::InvalidParameter(format!("radius {r} must exceed two grid cells ({})", 2.0 * self.h)));
        }
        for p in [[x0[0] - r, x0[1]], [x0[0] + r, x0[1]], [x0[0], x0[1] - r], [x0[0], x0[1] + r]] {
            if !self.interpolable(p) {
                return Err(Error::OutOfDomain(p[0], p[1]));
            }
        }
        Ok(())
    }

    /// Midpoint rule over cells whose center lies in the ball, with
    /// centered-difference gradients.
    fn ball_energy(&self, x0: Point, r: f64) -> Result<f64> {
        self.check_ball(x0, r)?;
        let h = self.h;
        let range = |c: f64, o: f64, n: usize| {
            let lo = (((c - r - o) / h - 0.5).floor().max(1.0)) as usize;
            let hi = (((c + r - o) / h - 0.5).ceil() as usize).min(n - 2);
            lo..=hi
        };
        let (ri, rj) = (range(x0[0], self.origin[0], self.nx), range(x0[1], self.origin[1], self.ny));
        let rows: Vec<f64> = rj
            .into_par_iter()
            .map(|j| {
                let mut s = 0.0;
                for i in ri.clone() {
                    let p = self.node(i, j);
                    if (p[0] - x0[0]).hypot(p[1] - x0[1]) < r {
                        let g = self.node_gradient(i, j);
                        s += g[0] * g[0] + g[1] * g[1] - 2.0 * self.at(i, j) * self.source(i, j);
                    }
                }
                s
            })
            .collect();
        Ok(rows.iter().sum::<f64>() * h * h)
    }

    fn sphere_nodes(&self, r: f64) -> usize {
        MIN_SPHERE_NODES.max((4.0 * PI * r / self.h).ceil() as usize)
    }
}

/// Angular nodes of the polar quadrature used for closed-form fields.
const POLAR_ANGLES: usize = 512;
/// Radial Gauss-Legendre nodes per panel.
const POLAR_RADIAL: usize = 24;

impl Synthetic {
    /// Radii along the ray `x0 + ρ(cos t, sin t)`, `0 < ρ < r`, where the
    /// source term jumps.
    fn source_breaks(&self, x0: Point, t: f64, r: f64) -> Vec<f64> {
        match self {
            Self::Rankine { .. } | Self::Cubic { .. } => {
                // |x0 + ρ e|² = 1
                let (s, c) = t.sin_cos();
                let b = x0[0] * c + x0[1] * s;
                let cc = x0[0] * x0[0] + x0[1] * x0[1] - 1.0;
                let disc = b * b - cc;
                if disc <= 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                [-b - sq, -b + sq].into_iter().filter(|&x| x > 0.0 && x < r).collect()
            }
            _ => Vec::new(),
        }
    }
}

impl WeissField for Synthetic {
    fn omega(&self) -> f64 {
        Synthetic::omega(self)
    }

    fn check_ball(&self, _x0: Point, r: f64) -> Result<()> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Ok(())
    }

    /// Polar quadrature: trapezoid in angle, Gauss-Legendre in radius split
    /// where the source term jumps.
    fn ball_energy(&self, x0: Point, r: f64) -> Result<f64> {
        self.check_ball(x0, r)?;
        let gl = gauss_legendre(POLAR_RADIAL);
        let dt = 2.0 * PI / POLAR_ANGLES as f64;
        let total: f64 = circle_angles(POLAR_ANGLES)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&t| {
                let (s, c) = t.sin_cos();
                let mut knots = vec![0.0];
                knots.extend(self.source_breaks(x0, t, r));
                knots.push(r);
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    for &(x, wt) in &gl {
                        let rho = 0.5 * (a + b) + 0.5 * (b - a) * x;
                        let p = [x0[0] + rho * c, x0[1] + rho * s];
                        let g = self.grad(p);
                        let e = g[0] * g[0] + g[1] * g[1] - 2.0 * self.eval(p) * self.source(p);
                        acc += 0.5 * (b - a) * wt * e * rho;
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        Ok(total * dt)
    }

    fn sphere_nodes(&self, _r: f64) -> usize {
        POLAR_ANGLES
    }
}

fn sphere_points(x0: Point, r: f64, n: usize) -> impl Iterator<Item = (Point, Point)> {
    circle_angles(n).map(move |t| {
        let (s, c) = t.sin_cos();
        ([x0[0] + r * c, x0[1] + r * s], [c, s])
    })
}

/// `∫_{∂B_r(x0)} u²` by the trapezoid rule.
pub fn sphere_square_integral<F: WeissField + ?Sized>(field: &F, x0: Point, r: f64) -> Result<f64> {
    field.check_ball(x0, r)?;
    let n = field.sphere_nodes(r);
    let mut s = 0.0;
    for (p, _) in sphere_points(x0, r, n) {
        s += field.value(p)?.powi(2);
    }
    Ok(s * 2.0 * PI * r / n as f64)
}

/// `S(x0, r) = (r^{-1} ∫_{∂B_r(x0)} u²)^{1/2}`.
pub fn s_norm<F: WeissField + ?Sized>(field: &F, x0: Point, r: f64) -> Result<f64> {
    Ok((sphere_square_integral(field, x0, r)? / r).sqrt())
}

/// `Φ_{x0}(r)`.
pub fn weiss_value<F: WeissField + ?Sized>(field: &F, x0: Point, r: f64) -> Result<f64> {
    let e = field.ball_energy(x0, r)?;
    let b = sphere_square_integral(field, x0, r)?;
    Ok(e / r.powi(ENERGY_EXPONENT) - 2.0 * b / r.powi(BOUNDARY_EXPONENT))
}

/// Φ, S and the growth ratio `T = S/r²` at geometrically spaced radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeissProfile {
    pub x0: Point,
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    pub s: Vec<f64>,
    pub growth: Vec<f64>,
}

impl WeissProfile {
    /// Largest decrease `Φ(r_i) - Φ(r_{i+1})` between consecutive radii
    /// (nonpositive for a nondecreasing profile).
    pub fn max_decrease(&self) -> f64 {
        self.phi.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        self.max_decrease() <= slack
    }

    /// CSV with columns `r, phi, s, growth`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "r,phi,s,growth")?;
        for i in 0..self.radii.len() {
            writeln!(w, "{:?},{:?},{:?},{:?}", self.radii[i], self.phi[i], self.s[i], self.growth[i])?;
        }
        Ok(())
    }
}

/// Geometric sequence of `count` radii from `r_min` to `r_max`.
pub fn geometric_radii(r_min: f64, r_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && count >= 2) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r_min < r_max and count >= 2 (got {r_min}, {r_max}, {count})"
        )));
    }
    let q = (r_max / r_min).powf(1.0 / (count - 1) as f64);
    let mut v: Vec<f64> = (0..count).map(|i| r_min * q.powi(i as i32)).collect();
    v[count - 1] = r_max;
    Ok(v)
}

pub fn weiss_profile<F: WeissField + ?Sized>(
    field: &F,
    x0: Point,
    r_min: f64,
    r_max: f64,
    count: usize,
) -> Result<WeissProfile> {
    let radii = geometric_radii(r_min, r_max, count)?;
    let mut phi = Vec::with_capacity(count);
    let mut s = Vec::with_capacity(count);
    for &r in &radii {
        let e = field.ball_energy(x0, r)?;
        let b = sphere_square_integral(field, x0, r)?;
        phi.push(e / r.powi(ENERGY_EXPONENT) - 2.0 * b / r.powi(BOUNDARY_EXPONENT));
        s.push((b / r).sqrt());
    }
    let growth = s.iter().zip(&radii).map(|(s, r)| s / (r * r)).collect();
    Ok(WeissProfile { x0, radii, phi, s, growth })
}

/// Both sides of `Φ(δ) - Φ(ρ) = ∫_ρ^δ 2r^{-4} ∫_{∂B_r} (∇u·ν - 2u/r)² dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Radial shells: 16 panels of 4 Gauss-Legendre nodes.
const SHELL_PANELS: usize = 16;
const SHELL_ORDER: usize = 4;

pub fn derivative_identity<F: WeissField + ?Sized>(field: &F, x0: Point, rho: f64, delta: f64) -> Result<IdentityCheck> {
    if !(rho < delta) {
        return Err(Error::InvalidParameter(format!("need rho < delta, got {rho} and {delta}")));
    }
    let lhs = weiss_value(field, x0, delta)? - weiss_value(field, x0, rho)?;
    let shells = composite_gauss(rho, delta, SHELL_PANELS, SHELL_ORDER);
    let mut rhs = 0.0;
    for (r, w) in shells {
        field.check_ball(x0, r)?;
        let n = field.sphere_nodes(r);
        let mut s = 0.0;
        for (p, nu) in sphere_points(x0, r, n) {
            let g = field.gradient(p)?;
            let d = g[0] * nu[0] + g[1] * nu[1] - 2.0 * field.value(p)? / r;
            s += d * d;
        }
        s *= 2.0 * PI * r / n as f64;
        rhs += w * 2.0 * s / r.powi(ENERGY_EXPONENT);
    }
    Ok(IdentityCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// `|LHS - RHS|` of the monotonicity identity between radii `rho < delta`.
pub fn derivative_identity_residual<F: WeissField + ?Sized>(field: &F, x0: Point, rho: f64, delta: f64) -> Result<f64> {
    Ok(derivative_identity(field, x0, rho, delta)?.residual)
}

/// Vector field sampled on the nodes of a [`ScalarField`] grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSamples {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl VectorSamples {
    pub fn zeros(field: &ScalarField) -> Self {
        Self { x1: vec![0.0; field.nx * field.ny], x2: vec![0.0; field.nx * field.ny] }
    }

    pub fn from_fn(field: &ScalarField, f: impl Fn(Point) -> Point) -> Self {
        let mut v = Self::zeros(field);
        for j in 0..field.ny {
            for i in 0..field.nx {
                let x = f(field.node(i, j));
                v.x1[j * field.nx + i] = x[0];
                v.x2[j * field.nx + i] = x[1];
            }
        }
        v
    }

    /// `X(x) = b(|x - c|/R) (x - c)` with the smooth bump
    /// `b(s) = exp(1 - 1/(1 - s²))` for `s < 1`.
    pub fn radial_bump(field: &ScalarField, center: Point, radius: f64) -> Self {
        Self::from_fn(field, |p| {
            let d = [p[0] - center[0], p[1] - center[1]];
            let s2 = (d[0] * d[0] + d[1] * d[1]) / (radius * radius);
            if s2 >= 1.0 {
                [0.0, 0.0]
            } else {
                let b = (1.0 - 1.0 / (1.0 - s2)).exp();
                [b * d[0], b * d[1]]
            }
        })
    }
}

/// Value of the domain-variation integral together with the integral of the
/// absolute integrand, which sets its natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationCheck {
    pub integral: f64,
    pub scale: f64,
}

/// Support margin (in cells) required of the test vector field.
const SUPPORT_MARGIN: usize = 4;

/// `∫ |∇u|² div X - 2 ∇uᵀ DX ∇u - 2 u f div X` by the midpoint rule with
/// centered differences.
pub fn variation_check(field: &ScalarField, x: &VectorSamples) -> Result<VariationCheck> {
    let (nx, ny) = (field.nx, field.ny);
    if x.x1.len() != nx * ny || x.x2.len() != nx * ny {
        return Err(Error::InvalidTestField("vector samples do not match the grid".into()));
    }
    for j in 0..ny {
        for i in 0..nx {
            let edge = i < SUPPORT_MARGIN || j < SUPPORT_MARGIN || i >= nx - SUPPORT_MARGIN || j >= ny - SUPPORT_MARGIN;
            let k = j * nx + i;
            if edge && (x.x1[k] != 0.0 || x.x2[k] != 0.0) {
                return Err(Error::InvalidTestField(format!(
                    "vector field must vanish within {SUPPORT_MARGIN} cells of the box edge"
                )));
            }
        }
    }
    let inv = 0.5 / field.h;
    let rows: Vec<(f64, f64)> = (1..ny - 1)
        .into_par_iter()
        .map(|j| {
            let (mut s, mut a) = (0.0, 0.0);
            for i in 1..nx - 1 {
                let k = j * nx + i;
                let d11 = (x.x1[k + 1] - x.x1[k - 1]) * inv;
                let d12 = (x.x1[k + nx] - x.x1[k - nx]) * inv;
                let d21 = (x.x2[k + 1] - x.x2[k - 1]) * inv;
                let d22 = (x.x2[k + nx] - x.x2[k - nx]) * inv;
                if d11 == 0.0 && d12 == 0.0 && d21 == 0.0 && d22 == 0.0 {
                    continue;
                }
                let g = field.node_gradient(i, j);
                let div = d11 + d22;
                let g2 = g[0] * g[0] + g[1] * g[1];
                // ∇uᵀ DX ∇u with (DX)_{ab} = ∂_b X_a
                let quad = g[0] * (d11 * g[0] + d12 * g[1]) + g[1] * (d21 * g[0] + d22 * g[1]);
                let src = 2.0 * field.at(i, j) * field.source(i, j) * div;
                s += g2 * div - 2.0 * quad - src;
                a += (g2 * div).abs() + 2.0 * quad.abs() + src.abs();
            }
            (s, a)
        })
        .collect();
    let h2 = field.h * field.h;
    let (s, a) = rows.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    Ok(VariationCheck { integral: s * h2, scale: a * h2 })
}

pub fn variation_residual(field: &ScalarField, x: &VectorSamples) -> Result<f64> {
    Ok(variation_check(field, x)?.integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::BoxRegion;
    use approx::assert_relative_eq;

    #[test]
    fn s_norm_closed_forms() {
        let saddle = Synthetic::Saddle { scale: 1.0, omega: 0.25 };
        for r in [0.1, 0.5, 2.0] {
            assert_relative_eq!(s_norm(&saddle, [0.0, 0.0], r).unwrap(), PI.sqrt() * r * r, max_relative = 1e-12);
        }
        let c = Synthetic::Constant { c: 1.5, omega: 0.25 };
        assert_relative_eq!(s_norm(&c, [0.0, 0.0], 0.3).unwrap(), 1.5 * (2.0 * PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn zero_field_has_zero_functional() {
        let bx = BoxRegion::square(1.0).unwrap();
        let f = Synthetic::Zero { omega: 0.25 }.sample(&bx, 1.0 / 64.0).unwrap();
        for r in [0.1, 0.3, 0.5] {
            assert_eq!(weiss_value(&f, [0.0, 0.0], r).unwrap(), 0.0);
        }
    }

    #[test]
    fn homogeneous_fields_satisfy_the_identity_trivially() {
        let f = Synthetic::CuspRay { omega: 0.25 };
        let c = derivative_identity(&f, [0.0, 0.0], 0.1, 0.4).unwrap();
        assert!(c.lhs.abs() < 1e-12 && c.rhs.abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn zero_vector_field_gives_zero() {
        let bx = BoxRegion::square(1.0).unwrap();
        let f = Synthetic::Rankine { omega: 0.25 }.sample(&bx, 1.0 / 32.0).unwrap();
        assert_eq!(variation_residual(&f, &VectorSamples::zeros(&f)).unwrap(), 0.0);
    }

    #[test]
    fn support_violation_is_rejected() {
        let bx = BoxRegion::square(1.0).unwrap();
        let f = Synthetic::Rankine { omega: 0.25 }.sample(&bx, 1.0 / 32.0).unwrap();
        let x = VectorSamples::from_fn(&f, |p| p);
        assert!(matches!(variation_residual(&f, &x), Err(Error::InvalidTestField(_))));
    }

    #[test]
    fn profile_radii_are_geometric() {
        let r = geometric_radii(0.05, 0.4, 16).unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!(r[15], 0.4);
        assert_relative_eq!(r[1] / r[0], r[15] / r[14], max_relative = 1e-12);
    }
}
