//! Generalized Newtonian potential of the quadrant cone.
//!
//! `z` solves `-Δz = I_C - 2Ω` in the plane for `C = {0 < θ < π/2}` and is
//! homogeneous of degree two up to a resonant logarithm:
//!
//! `z = r² φ(θ) + r² log r (log_a cos 2θ + log_b sin 2θ)`.
//!
//! Since `Δ(r² log r · p) = 4p` for `p` in the kernel `span{cos 2θ, sin 2θ}`,
//! the angular part solves `-φ'' - 4φ = χ_C + 4p`, which is solvable exactly
//! when `p` cancels the `k = ±2` content of `χ_C` (resonance balance). The
//! kernel part of `φ` is then fixed by requiring `Π(z) = 0` on the unit disk.
//!
//! Under `χ̂(k) = (1/2π) ∫ χ e^{-ikθ}`, `χ̂_C(2) = -i/(2π)`, hence
//! `log_a = 0` and `log_b = -1/(4π)`; the constant mode is `-(1/4 - 2Ω)/4`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::angular::{chi_hat, AngularConfig, AngularProfile};
use crate::blowup::{harmonic_projection, HarmonicQuadratic};
use crate::error::{Error, Result};
use crate::field::{newtonian_potential, BoxRegion, PlanarField, ScalarField};
use crate::geometry::Point;

pub const DEFAULT_MODES: usize = 512;
pub const MIN_MODES: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct ConePotential {
    pub omega: f64,
    /// Coefficient of `r² log r cos 2θ`.
    pub log_a: f64,
    /// Coefficient of `r² log r sin 2θ`.
    pub log_b: f64,
    /// Angular part `φ`; its `kernel` holds `(α, β)`.
    pub phi: AngularProfile,
}

/// Angular data of the quadrant, `χ_C = I_{(0, π/2)} - 2Ω`.
fn quadrant(omega: f64) -> AngularConfig {
    AngularConfig { omega, arcs: vec![(0.0, PI / 2.0)] }
}

impl ConePotential {
    pub fn build(omega: f64, k_max: usize) -> Result<Self> {
        if !(omega.is_finite() && (0.0..0.5).contains(&omega)) {
            return Err(Error::InvalidOmega(omega));
        }
        if k_max < MIN_MODES {
            return Err(Error::InvalidParameter(format!("truncation {k_max} below {MIN_MODES}")));
        }
        let cfg = quadrant(omega);
        // p̂(2) = (log_a - i log_b)/2 must equal -χ̂(2)/4
        let c2 = chi_hat(&cfg, 2);
        let log_a = -c2.re / 2.0;
        let log_b = c2.im / 2.0;
        let modes = (1..=k_max as i64)
            .map(|k| if k == 2 { num_complex::Complex64::new(0.0, 0.0) } else { chi_hat(&cfg, k) / (k * k - 4) as f64 })
            .collect();
        // Π(r²(α cos 2θ + β sin 2θ)) = (2α, 2β), Π(r² log r p) = (log_a, log_b)/2
        let kernel = (-log_a / 4.0, -log_b / 4.0);
        let phi = AngularProfile { config: cfg.clone(), c0: -chi_hat(&cfg, 0).re / 4.0, kernel, modes };
        Ok(Self { omega, log_a, log_b, phi })
    }

    pub fn k_max(&self) -> usize {
        self.phi.k_max()
    }

    /// Harmonic quadratic `log_a (x1² - x2²) + 2 log_b x1 x2 = r² p(θ)`.
    pub fn resonant_quadratic(&self) -> HarmonicQuadratic {
        HarmonicQuadratic { a: 2.0 * self.log_a, b: 2.0 * self.log_b }
    }

    fn resonant(&self, theta: f64) -> (f64, f64) {
        let (s, c) = (2.0 * theta).sin_cos();
        (self.log_a * c + self.log_b * s, -2.0 * self.log_a * s + 2.0 * self.log_b * c)
    }

    pub fn eval(&self, p: Point) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        if r2 == 0.0 {
            return 0.0;
        }
        let t = p[1].atan2(p[0]);
        let (q, _) = self.resonant(t);
        r2 * (self.phi.eval(t) + 0.5 * r2.ln() * q)
    }

    pub fn grad(&self, p: Point) -> Point {
        let r = p[0].hypot(p[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let t = p[1].atan2(p[0]);
        let [f, df, _] = self.phi.eval_all(t);
        let (q, dq) = self.resonant(t);
        let lr = r.ln();
        let ur = 2.0 * r * f + (2.0 * r * lr + r) * q;
        // (1/r) ∂_θ
        let ut = r * df + r * lr * dq;
        let (s, c) = (p[1] / r, p[0] / r);
        [ur * c - ut * s, ur * s + ut * c]
    }

    /// `z(sx)/s² - z(x) - log s (log_a (x1² - x2²) + 2 log_b x1 x2)`.
    pub fn scaling_defect(&self, x: Point, s: f64) -> f64 {
        let lhs = self.eval([s * x[0], s * x[1]]) / (s * s) - self.eval(x);
        lhs - s.ln() * self.resonant_quadratic().eval(x)
    }

    /// Largest `|-Δ_h z - (I_C - 2Ω)|` over the cell centers of `bx`, skipping
    /// nodes within `delta` of the origin or of the two edges of the cone.
    pub fn laplacian_residual(&self, bx: &BoxRegion, h: f64, delta: f64) -> Result<f64> {
        if !(h > 0.0) || delta < 4.0 * h {
            return Err(Error::InvalidParameter(format!("need h > 0 and delta >= 4h (h = {h}, delta = {delta})")));
        }
        let nx = ((bx.xmax - bx.xmin) / h).round() as usize;
        let ny = ((bx.ymax - bx.ymin) / h).round() as usize;
        let far = |p: Point| {
            let d0 = p[0].hypot(p[1]);
            // distance to the rays θ = 0 and θ = π/2
            let d1 = if p[0] >= 0.0 { p[1].abs() } else { d0 };
            let d2 = if p[1] >= 0.0 { p[0].abs() } else { d0 };
            d0 >= delta && d1 >= delta && d2 >= delta
        };
        let worst = (0..nx * ny)
            .into_par_iter()
            .filter_map(|k| {
                let p = [bx.xmin + ((k % nx) as f64 + 0.5) * h, bx.ymin + ((k / nx) as f64 + 0.5) * h];
                far(p).then(|| self.point_residual(p, h))
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    }

    /// Five-point residual at a single point.
    pub fn point_residual(&self, p: Point, h: f64) -> f64 {
        let z = |dx: f64, dy: f64| self.eval([p[0] + dx, p[1] + dy]);
        let lap = (z(h, 0.0) + z(-h, 0.0) + z(0.0, h) + z(0.0, -h) - 4.0 * z(0.0, 0.0)) / (h * h);
        (-lap - self.source(p)).abs()
    }

    /// `I_C(p) - 2Ω`.
    pub fn source(&self, p: Point) -> f64 {
        let inside = p[0] > 0.0 && p[1] > 0.0;
        (if inside { 1.0 } else { 0.0 }) - 2.0 * self.omega
    }

    /// Projection of `z_s(x) = z(sx)/s²` onto harmonic quadratics over `B₁`.
    pub fn projection_report(&self, s: f64) -> Result<ProjectionReport> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!("scale {s} outside (0, 1]")));
        }
        let pi = harmonic_projection(&Scaled { pot: self, s })?;
        Ok(ProjectionReport { s, pi, tau: pi.sup_norm() })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let modes = self.phi.to_json()["modes"].clone();
        json!({
            "omega": self.omega,
            "K": self.k_max(),
            "logA": self.log_a,
            "logB": self.log_b,
            "c0": self.phi.c0,
            "kernel": {"alpha": self.phi.kernel.0, "beta": self.phi.kernel.1},
            "modes": modes,
        })
    }

    /// CSV with columns `x1,x2,z` at the cell centers of `bx`.
    pub fn write_csv(&self, bx: &BoxRegion, h: f64, mut w: impl Write) -> Result<()> {
        let f = ScalarField::from_fn(bx, h, self.omega, |p| self.eval(p), |p| p[0] > 0.0 && p[1] > 0.0)?;
        writeln!(w, "x1,x2,z")?;
        for j in 0..f.ny {
            for i in 0..f.nx {
                let p = f.node(i, j);
                writeln!(w, "{:?},{:?},{:?}", p[0], p[1], f.at(i, j))?;
            }
        }
        Ok(())
    }
}

impl PlanarField for ConePotential {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.eval(p))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        Ok(self.grad(p))
    }
}

struct Scaled<'a> {
    pot: &'a ConePotential,
    s: f64,
}

impl PlanarField for Scaled<'_> {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.pot.eval([self.s * p[0], self.s * p[1]]) / (self.s * self.s))
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        let g = self.pot.grad([self.s * p[0], self.s * p[1]]);
        Ok([g[0] / self.s, g[1] / self.s])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub s: f64,
    pub pi: HarmonicQuadratic,
    pub tau: f64,
}

/// Independent construction: the grid potential of `(I_C - 2Ω) 1_{B_R}` on a
/// square of half-width `R + margin`. Inside `B_R` it differs from `z` by a
/// harmonic function; the returned value is the sup over grid nodes in `B₁` of
/// `z - w` after removing its least-squares fit by harmonic polynomials of
/// degree at most three (the degree-two part absorbs the `log R` drift of the
/// truncated density, degree three its leading far-field correction).
pub fn poisson_comparison(pot: &ConePotential, radius: f64, h: f64) -> Result<f64> {
    if radius < 2.0 {
        return Err(Error::InvalidParameter(format!("disk radius {radius} below 2")));
    }
    let half = (radius / h).ceil() * h + 4.0 * h;
    let bx = BoxRegion::square(half)?;
    let f = ScalarField::from_fn(&bx, h, pot.omega, |_| 0.0, |p| p[0] > 0.0 && p[1] > 0.0)?;
    let density: Vec<f64> = (0..f.nx * f.ny)
        .map(|k| {
            let p = f.node(k % f.nx, k / f.nx);
            if p[0].hypot(p[1]) < radius {
                pot.source(p)
            } else {
                0.0
            }
        })
        .collect();
    let w = newtonian_potential(&bx, h, &density)?;
    let mut pts = Vec::new();
    let mut diff = Vec::new();
    for j in 0..f.ny {
        for i in 0..f.nx {
            let p = f.node(i, j);
            if p[0].hypot(p[1]) <= 1.0 {
                pts.push(p);
                diff.push(pot.eval(p) - w[j * f.nx + i]);
            }
        }
    }
    let basis = |p: Point| -> [f64; 7] {
        let (x, y) = (p[0], p[1]);
        [1.0, x, y, x * x - y * y, x * y, x * x * x - 3.0 * x * y * y, 3.0 * x * x * y - y * y * y]
    };
    let m = nalgebra::DMatrix::from_fn(pts.len(), 7, |i, j| basis(pts[i])[j]);
    let rhs = nalgebra::DVector::from_vec(diff);
    let coef = m.clone().svd(true, true).solve(&rhs, 1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((&m * coef - rhs).amax())
}
