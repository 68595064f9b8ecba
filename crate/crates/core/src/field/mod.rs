//! Relative stream function on a uniform Cartesian grid.
//!
//! For a patch `D` rotating with angular velocity `Ω` the relative stream
//! function solves `-Δψ = I_D - 2Ω` with `ψ = 0` on `∂D`. It is represented as
//! `ψ = -(1/2π) ∫_D log|x-y| dy + Ω|x|²/2 + c`, sampled at cell centers.

pub mod newton;
pub mod synthetic;

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{PatchBoundary, Point};

pub use synthetic::Synthetic;

/// Smallest accepted node count per axis.
pub const MIN_NODES: usize = 16;

/// Boundary samples per component used to fix the additive constant.
const NORMALIZATION_SAMPLES: usize = 512;

/// A scalar field with pointwise value and gradient.
pub trait PlanarField: Sync {
    fn value(&self, p: Point) -> Result<f64>;
    fn gradient(&self, p: Point) -> Result<Point>;
}

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BoxRegion {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) || ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate box [{xmin}, {xmax}] x [{ymin}, {ymax}]")));
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    /// The square `[-a, a]²`.
    pub fn square(a: f64) -> Result<Self> {
        Self::new(-a, a, -a, a)
    }
}

/// Samples at the cell centers of a uniform grid. Node `(i, j)` sits at
/// `origin + ((i + ½)h, (j + ½)h)`; arrays are row-major with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub omega: f64,
    pub values: Vec<f64>,
    pub indicator: Vec<bool>,
}

fn grid_counts(bx: &BoxRegion, h: f64) -> Result<(usize, usize)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {h}")));
    }
    let nx = ((bx.xmax - bx.xmin) / h - 1e-9).ceil() as usize;
    let ny = ((bx.ymax - bx.ymin) / h - 1e-9).ceil() as usize;
    if nx < MIN_NODES || ny < MIN_NODES {
        return Err(Error::InvalidParameter(format!("grid of {nx}x{ny} nodes is below the minimum {MIN_NODES}")));
    }
    Ok((nx, ny))
}

/// Cubic Lagrange weights on nodes `-1, 0, 1, 2` at offset `t`, and their derivatives.
fn lagrange4(t: f64) -> ([f64; 4], [f64; 4]) {
    let w = [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ];
    let d = [
        -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
        -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
        (3.0 * t * t - 1.0) / 6.0,
    ];
    (w, d)
}

impl ScalarField {
    /// Samples `f` and `inside` at the cell centers of `bx`.
    pub fn from_fn(
        bx: &BoxRegion,
        h: f64,
        omega: f64,
        f: impl Fn(Point) -> f64 + Sync,
        inside: impl Fn(Point) -> bool + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let (nx, ny) = grid_counts(bx, h)?;
        let origin = [bx.xmin, bx.ymin];
        let node = |k: usize| [origin[0] + ((k % nx) as f64 + 0.5) * h, origin[1] + ((k / nx) as f64 + 0.5) * h];
        let values: Vec<f64> = (0..nx * ny).into_par_iter().map(|k| f(node(k))).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("sampled field has non-finite values".into()));
        }
        let indicator = (0..nx * ny).into_par_iter().map(|k| inside(node(k))).collect();
        Ok(Self { origin, h, nx, ny, omega, values, indicator })
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        [self.origin[0] + (i as f64 + 0.5) * self.h, self.origin[1] + (j as f64 + 0.5) * self.h]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.indicator[j * self.nx + i]
    }

    pub fn bounds(&self) -> BoxRegion {
        BoxRegion {
            xmin: self.origin[0],
            xmax: self.origin[0] + self.nx as f64 * self.h,
            ymin: self.origin[1],
            ymax: self.origin[1] + self.ny as f64 * self.h,
        }
    }

    /// Source term `(1-2Ω) I_D - 2Ω I_{D^c}` at node `(i, j)`.
    pub fn source(&self, i: usize, j: usize) -> f64 {
        if self.inside(i, j) {
            1.0 - 2.0 * self.omega
        } else {
            -2.0 * self.omega
        }
    }

    /// Fractional grid coordinates of `p`, or `OutOfDomain` if the 4×4
    /// interpolation stencil would leave the grid.
    fn locate(&self, p: Point) -> Result<(usize, f64, usize, f64)> {
        let sx = (p[0] - self.origin[0]) / self.h - 0.5;
        let sy = (p[1] - self.origin[1]) / self.h - 0.5;
        let ok = |s: f64, n: usize| s.is_finite() && s >= 1.0 && s <= (n - 2) as f64;
        if !ok(sx, self.nx) || !ok(sy, self.ny) {
            return Err(Error::OutOfDomain(p[0], p[1]));
        }
        let i = (sx.floor() as usize).min(self.nx - 3);
        let j = (sy.floor() as usize).min(self.ny - 3);
        Ok((i, sx - i as f64, j, sy - j as f64))
    }

    /// True if `p` lies in the region where [`ScalarField::eval`] is defined.
    pub fn interpolable(&self, p: Point) -> bool {
        self.locate(p).is_ok()
    }

    /// Value and gradient of the tensor-product cubic interpolant.
    pub fn eval_with_gradient(&self, p: Point) -> Result<(f64, Point)> {
        let (i, tx, j, ty) = self.locate(p)?;
        let (wx, dx) = lagrange4(tx);
        let (wy, dy) = lagrange4(ty);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for b in 0..4 {
            let row = (j + b - 1) * self.nx + i - 1;
            let (mut rv, mut rd) = (0.0, 0.0);
            for a in 0..4 {
                let u = self.values[row + a];
                rv += wx[a] * u;
                rd += dx[a] * u;
            }
            v += wy[b] * rv;
            gx += wy[b] * rd;
            gy += dy[b] * rv;
        }
        Ok((v, [gx / self.h, gy / self.h]))
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        let (i, tx, j, ty) = self.locate(p)?;
        let (wx, _) = lagrange4(tx);
        let (wy, _) = lagrange4(ty);
        let mut v = 0.0;
        for b in 0..4 {
            let row = (j + b - 1) * self.nx + i - 1;
            let rv: f64 = (0..4).map(|a| wx[a] * self.values[row + a]).sum();
            v += wy[b] * rv;
        }
        Ok(v)
    }

    /// Centered-difference gradient at an interior node.
    pub fn node_gradient(&self, i: usize, j: usize) -> Point {
        let k = j * self.nx + i;
        let inv = 0.5 / self.h;
        [
            (self.values[k + 1] - self.values[k - 1]) * inv,
            (self.values[k + self.nx] - self.values[k - self.nx]) * inv,
        ]
    }

    /// Indicator at the node nearest to `p`.
    pub fn indicator_at(&self, p: Point) -> Result<bool> {
        let i = ((p[0] - self.origin[0]) / self.h).floor();
        let j = ((p[1] - self.origin[1]) / self.h).floor();
        if !(i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny) {
            return Err(Error::OutOfDomain(p[0], p[1]));
        }
        Ok(self.inside(i as usize, j as usize))
    }

    /// Largest absolute sampled value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "origin": self.origin,
            "h": self.h,
            "nx": self.nx,
            "ny": self.ny,
            "omega": self.omega,
            "values": self.values,
            "indicator": self.indicator.iter().map(|&b| b as u8).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            origin: Point,
            h: f64,
            nx: usize,
            ny: usize,
            omega: f64,
            values: Vec<f64>,
            indicator: Vec<u8>,
        }
        let r: Raw = serde_json::from_value(v.clone())?;
        if r.values.len() != r.nx * r.ny || r.indicator.len() != r.nx * r.ny {
            return Err(Error::InvalidParameter("field arrays do not match nx*ny".into()));
        }
        if r.nx < MIN_NODES || r.ny < MIN_NODES || !(r.h > 0.0) {
            return Err(Error::InvalidParameter("field grid is too small or has non-positive spacing".into()));
        }
        Ok(Self {
            origin: r.origin,
            h: r.h,
            nx: r.nx,
            ny: r.ny,
            omega: r.omega,
            values: r.values,
            indicator: r.indicator.into_iter().map(|b| b != 0).collect(),
        })
    }

    /// CSV with columns `x1, x2, psi, inD`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x1,x2,psi,inD")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                writeln!(w, "{},{},{},{}", p[0], p[1], self.at(i, j), self.inside(i, j) as u8)?;
            }
        }
        Ok(())
    }
}

impl PlanarField for ScalarField {
    fn value(&self, p: Point) -> Result<f64> {
        self.eval(p)
    }

    fn gradient(&self, p: Point) -> Result<Point> {
        Ok(self.eval_with_gradient(p)?.1)
    }
}

/// Potential `-(1/2π) ∫ ρ(y) log|x-y| dy` of a cellwise-constant density,
/// evaluated at the cell centers of the grid of `bx`.
pub fn newtonian_potential(bx: &BoxRegion, h: f64, density: &[f64]) -> Result<Vec<f64>> {
    let (nx, ny) = grid_counts(bx, h)?;
    if density.len() != nx * ny {
        return Err(Error::InvalidParameter(format!("density has {} entries, grid has {}", density.len(), nx * ny)));
    }
    Ok(newton::newtonian_fft(nx, ny, h, density))
}

/// Relative stream function of `patch` rotating at `omega`, sampled on the
/// cell centers of `bx` with spacing `h`.
///
/// The box must leave a margin of at least one patch diameter around the
/// patch. The additive constant makes the mean over boundary samples zero.
pub fn relative_stream(patch: &PatchBoundary, omega: f64, bx: &BoxRegion, h: f64) -> Result<ScalarField> {
    if !(omega > 0.0 && omega < 0.5) {
        return Err(Error::InvalidOmega(omega));
    }
    let bb = patch.bounding_box();
    let d = patch.diameter();
    let slack = 1e-12 * d;
    if bx.xmin > bb[0] - d + slack || bx.xmax < bb[1] + d - slack || bx.ymin > bb[2] - d + slack || bx.ymax < bb[3] + d - slack {
        return Err(Error::DomainTooSmall(format!(
            "box must extend one diameter ({d}) beyond the patch bounding box {bb:?}"
        )));
    }
    let mut field = ScalarField::from_fn(bx, h, omega, |_| 0.0, |p| patch.contains(p))?;
    let density: Vec<f64> = field.indicator.iter().map(|&b| b as u8 as f64).collect();
    let newton = newton::newtonian_fft(field.nx, field.ny, h, &density);
    for j in 0..field.ny {
        for i in 0..field.nx {
            let p = field.node(i, j);
            field.values[j * field.nx + i] = newton[j * field.nx + i] + 0.5 * omega * (p[0] * p[0] + p[1] * p[1]);
        }
    }
    let samples = patch.boundary_points(NORMALIZATION_SAMPLES);
    let mut mean = 0.0;
    for p in &samples {
        mean += field.eval(*p)?;
    }
    mean /= samples.len() as f64;
    field.values.iter_mut().for_each(|v| *v -= mean);
    Ok(field)
}
