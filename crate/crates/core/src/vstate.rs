//! Uniformly rotating patches computed on a Fourier-parametrized boundary.
//!
//! The relative stream function is `ψ = N_D + Ω|x|²/2` with the Newtonian
//! potential `N_D(x) = -(1/2π) ∫_D log|x - y| dy`. Since
//! `Δ_y [|y-x|²(log|y-x| - 1)/4] = log|y-x|`, the area integral reduces to
//!
//! `∫_D log|x - y| dy = ∮ ((y - x)·ν / 2)(log|y - x| - 1/2) ds`,
//!
//! and `∇N_D(x) = (1/2π) ∮ log|x - y| ν ds`. On the boundary both integrands
//! carry a logarithmic singularity, handled by the Kress product quadrature.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::PlanarField;
use crate::geometry::{BoundaryNode, FourierBoundary, PatchBoundary, Point, MAX_FOURIER_MODES};

/// Smallest node count accepted by the boundary evaluators.
pub const MIN_NODES: usize = 64;
/// Relative finite-difference step of the Newton Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-7;
/// Shift of the deflation factor `1/‖a‖² + σ`.
pub const DEFLATION_SHIFT: f64 = 1.0;

/// Kress weights `R(s - t_j)` for `∫ log(4 sin²((s-t)/2)) f(t) dt ≈ Σ R_j f(t_j)`
/// on `n` equispaced nodes (`n` even), indexed by the offset `(s - t_j) n / 2π`.
pub fn kress_weights(n: usize) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Kress quadrature needs an even node count");
    let half = n / 2;
    (0..n)
        .map(|d| {
            let x = 2.0 * PI * d as f64 / n as f64;
            let mut s = 0.0;
            for m in 1..half {
                s += (m as f64 * x).cos() / m as f64;
            }
            -2.0 * PI / half as f64 * s - PI / (half * half) as f64 * (half as f64 * x).cos()
        })
        .collect()
}

/// Boundary quadrature of a simply connected patch.
#[derive(Debug, Clone)]
pub struct ContourQuadrature {
    pub nodes: Vec<BoundaryNode>,
    kress: Vec<f64>,
}

impl ContourQuadrature {
    pub fn new(patch: &PatchBoundary, n: usize) -> Result<Self> {
        if patch.components() != 1 {
            return Err(Error::InvalidGeometry("the contour solver needs a simply connected patch".into()));
        }
        if n < MIN_NODES || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!("node count {n} must be even and at least {MIN_NODES}")));
        }
        Ok(Self { nodes: patch.boundary_nodes(n), kress: kress_weights(n) })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn smooth_log(&self, i: usize, j: usize) -> f64 {
        // log|y_j - y_i| - ½ log(4 sin²((t_j - t_i)/2)), with its diagonal limit
        let n = self.len();
        if i == j {
            let t = self.nodes[i].tangent;
            return t[0].hypot(t[1]).ln();
        }
        let (x, y) = (self.nodes[i].point, self.nodes[j].point);
        let d2 = (y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2);
        let half = PI * (j as f64 - i as f64) / n as f64;
        0.5 * (d2 / (4.0 * half.sin().powi(2))).ln()
    }

    fn kress_at(&self, i: usize, j: usize) -> f64 {
        let n = self.len();
        self.kress[(i + n - j) % n]
    }

    /// `ψ` at every node.
    pub fn psi(&self, omega: f64) -> Vec<f64> {
        let n = self.len();
        let w = 2.0 * PI / n as f64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = self.nodes[i].point;
                let mut acc = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let y = self.nodes[j].point;
                    let nu = self.nodes[j].scaled_normal();
                    let a = 0.5 * ((y[0] - x[0]) * nu[0] + (y[1] - x[1]) * nu[1]);
                    acc += 0.5 * self.kress_at(i, j) * a + w * a * (self.smooth_log(i, j) - 0.5);
                }
                -acc / (2.0 * PI) + 0.5 * omega * (x[0] * x[0] + x[1] * x[1])
            })
            .collect()
    }

    /// `∇ψ` at every node.
    pub fn gradient(&self, omega: f64) -> Vec<Point> {
        let n = self.len();
        let w = 2.0 * PI / n as f64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = self.nodes[i].point;
                let mut g = [0.0, 0.0];
                for j in 0..n {
                    let nu = self.nodes[j].scaled_normal();
                    let c = 0.5 * self.kress_at(i, j) + w * self.smooth_log(i, j);
                    g[0] += c * nu[0];
                    g[1] += c * nu[1];
                }
                [g[0] / (2.0 * PI) + omega * x[0], g[1] / (2.0 * PI) + omega * x[1]]
            })
            .collect()
    }
}

/// `ψ` at a point off the boundary by the trapezoid rule on `n` nodes
/// (accurate when the point is several node spacings away from the curve).
pub fn contour_psi(patch: &PatchBoundary, omega: f64, x: Point, n: usize) -> Result<f64> {
    let q = ContourQuadrature::new(patch, n)?;
    let w = 2.0 * PI / n as f64;
    let mut acc = 0.0;
    for node in &q.nodes {
        let y = node.point;
        let nu = node.scaled_normal();
        let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
        let a = 0.5 * (dx * nu[0] + dy * nu[1]);
        acc += a * (0.5 * (dx * dx + dy * dy).ln() - 0.5);
    }
    Ok(-acc * w / (2.0 * PI) + 0.5 * omega * (x[0] * x[0] + x[1] * x[1]))
}

/// `sup_j |ψ(y_j) - mean ψ|` over `nodes` boundary nodes.
pub fn boundary_residual(patch: &PatchBoundary, omega: f64, nodes: usize) -> Result<f64> {
    let psi = ContourQuadrature::new(patch, nodes)?.psi(omega);
    Ok(sup_deviation(&psi))
}

fn sup_deviation(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|p| (p - mean).abs()).fold(0.0, f64::max)
}

/// Discretization of the m-fold V-state problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VStateProblem {
    pub omega: f64,
    pub m: usize,
    /// Free amplitudes `a_k` of `cos(k m θ)`, `k = 1..=modes`.
    pub modes: usize,
    pub nodes: usize,
}

impl VStateProblem {
    /// `nodes = None` selects `max(256, 8·modes·m)` rounded up to an even count.
    pub fn new(omega: f64, m: usize, modes: usize, nodes: Option<usize>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0 && omega < 0.5) {
            return Err(Error::InvalidOmega(omega));
        }
        if m < 2 {
            return Err(Error::InvalidFold(m));
        }
        if modes == 0 || modes * m > MAX_FOURIER_MODES {
            return Err(Error::InvalidParameter(format!(
                "{modes} modes of fold {m} exceed {MAX_FOURIER_MODES} Fourier coefficients"
            )));
        }
        let min = 8 * modes * m;
        let nodes = nodes.unwrap_or(min.max(256));
        let nodes = nodes + nodes % 2;
        if nodes < min {
            return Err(Error::InvalidParameter(format!("{nodes} nodes, at least {min} required")));
        }
        Ok(Self { omega, m, modes, nodes })
    }

    /// `r(θ) = r0 (1 + Σ a_k cos(k m θ))`.
    pub fn patch(&self, r0: f64, amps: &[f64]) -> Result<PatchBoundary> {
        let mut cos = vec![0.0; self.modes * self.m];
        for (k, a) in amps.iter().enumerate() {
            cos[(k + 1) * self.m - 1] = *a;
        }
        PatchBoundary::fourier(r0, [0.0, 0.0], cos, vec![]).map_err(|_| Error::SelfIntersection)
    }

    /// Galerkin residual `(2/n) Σ_j ψ_j cos(k m t_j)`, `k = 1..=modes`, and the
    /// sup-norm boundary residual.
    fn equations(&self, r0: f64, amps: &[f64], omega: f64) -> Result<(Vec<f64>, f64)> {
        let patch = self.patch(r0, amps)?;
        let psi = ContourQuadrature::new(&patch, self.nodes)?.psi(omega);
        let n = psi.len();
        let f = (1..=self.modes)
            .map(|k| {
                let mut s = 0.0;
                for (j, p) in psi.iter().enumerate() {
                    s += p * (2.0 * PI * ((k * self.m * j) % n) as f64 / n as f64).cos();
                }
                2.0 * s / n as f64
            })
            .collect();
        Ok((f, sup_deviation(&psi)))
    }

    /// Projects a centered star-shaped patch onto the m-fold cosine family.
    pub fn project(&self, patch: &PatchBoundary) -> Result<(f64, Vec<f64>)> {
        let n = self.nodes;
        let radius = polar_radius(patch)?;
        let r: Vec<f64> = (0..n).map(|j| radius(2.0 * PI * j as f64 / n as f64)).collect();
        let r0 = r.iter().sum::<f64>() / n as f64;
        let amps = (1..=self.modes)
            .map(|k| {
                let mut s = 0.0;
                for (j, rj) in r.iter().enumerate() {
                    s += rj * (2.0 * PI * ((k * self.m * j) % n) as f64 / n as f64).cos();
                }
                2.0 * s / (n as f64 * r0)
            })
            .collect();
        Ok((r0, amps))
    }
}

/// Polar radius function of a patch centered at the origin.
fn polar_radius(patch: &PatchBoundary) -> Result<Box<dyn Fn(f64) -> f64 + '_>> {
    match patch {
        PatchBoundary::Disk { r } => Ok(Box::new(move |_| *r)),
        PatchBoundary::Ellipse { a, b } => {
            Ok(Box::new(move |t: f64| a * b / ((b * t.cos()).powi(2) + (a * t.sin()).powi(2)).sqrt()))
        }
        PatchBoundary::Fourier(fb) if fb.center == [0.0, 0.0] => Ok(Box::new(move |t| fb.radius(t))),
        _ => Err(Error::InvalidGeometry("initial guess must be a star-shaped patch centered at the origin".into())),
    }
}

/// A converged V-state.
#[derive(Debug, Clone, PartialEq)]
pub struct VStateSolution {
    pub patch: PatchBoundary,
    pub omega: f64,
    pub m: usize,
    pub nodes: usize,
    /// Sup-norm boundary residual at `nodes`.
    pub residual: f64,
    /// Same residual re-evaluated with `2·nodes` nodes.
    pub certificate: f64,
    /// Relative amplitude of `cos(mθ)`.
    pub amplitude: f64,
    pub iterations: usize,
}

impl VStateSolution {
    fn fourier(&self) -> &FourierBoundary {
        match &self.patch {
            PatchBoundary::Fourier(fb) => fb,
            _ => unreachable!("solutions are stored in Fourier form"),
        }
    }

    /// Relative amplitudes `a_k` of `cos(k m θ)`.
    pub fn amplitudes(&self) -> Vec<f64> {
        let fb = self.fourier();
        (1..=fb.cos.len() / self.m).map(|k| fb.cos[k * self.m - 1]).collect()
    }

    /// Radii along the axes `θ = 0` and `θ = π/2`.
    pub fn axes(&self) -> (f64, f64) {
        let fb = self.fourier();
        (fb.radius(0.0), fb.radius(PI / 2.0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "omega": self.omega,
            "m": self.m,
            "nodes": self.nodes,
            "residual": self.residual,
            "certificate": self.certificate,
            "amplitude": self.amplitude,
            "iterations": self.iterations,
            "patch": self.patch.to_json(),
        })
    }
}

/// Options of the Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Deflate the disk `a = 0` so that a nonzero initial guess cannot fall
    /// back onto the trivial solution.
    pub deflate: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30, deflate: true }
    }
}

/// Newton iteration for the amplitudes at fixed `Ω`, starting from the
/// projection of `initial` onto the m-fold cosine family.
pub fn newton_solve(problem: &VStateProblem, initial: &PatchBoundary, opts: &NewtonOptions) -> Result<VStateSolution> {
    if !(opts.tol >= 1e-12) {
        return Err(Error::InvalidParameter(format!("tolerance {} below 1e-12", opts.tol)));
    }
    let (r0, mut a) = problem.project(initial)?;
    let omega = problem.omega;
    let dim = a.len();
    for it in 0..=opts.max_iter {
        let (f, res) = problem.equations(r0, &a, omega)?;
        if res <= opts.tol {
            return finish(problem, r0, &a, omega, res, it, opts.tol);
        }
        if it == opts.max_iter {
            return Err(Error::MaxIterExceeded { iterations: it, residual: res });
        }
        let jac = jacobian(dim, &f, |k, h| {
            let mut b = a.clone();
            b[k] += h;
            problem.equations(r0, &b, omega).map(|e| e.0)
        }, |k| a[k])?;
        let norm2: f64 = a.iter().map(|x| x * x).sum();
        let step = if opts.deflate && norm2 > 0.0 {
            // G = M F with M = 1/‖a‖² + σ; J_G = M J + F ∇Mᵀ, ∇M = -2a/‖a‖⁴
            let mf = 1.0 / norm2 + DEFLATION_SHIFT;
            let grad: Vec<f64> = a.iter().map(|x| -2.0 * x / (norm2 * norm2)).collect();
            let jg = DMatrix::from_fn(dim, dim, |i, j| mf * jac[(i, j)] + f[i] * grad[j]);
            let g = DVector::from_iterator(dim, f.iter().map(|v| mf * v));
            lu_step(jg, g)?
        } else {
            lu_step(jac, DVector::from_vec(f))?
        };
        for (x, d) in a.iter_mut().zip(step.iter()) {
            *x += d;
        }
    }
    unreachable!()
}

fn jacobian(
    dim: usize,
    f0: &[f64],
    eval: impl Fn(usize, f64) -> Result<Vec<f64>> + Sync,
    value: impl Fn(usize) -> f64 + Sync,
) -> Result<DMatrix<f64>> {
    let cols: Vec<(f64, Vec<f64>)> = (0..dim)
        .into_par_iter()
        .map(|k| {
            let h = JACOBIAN_STEP * value(k).abs().max(1e-2);
            eval(k, h).map(|v| (h, v))
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(f0.len(), dim, |i, k| (cols[k].1[i] - f0[i]) / cols[k].0))
}

fn lu_step(j: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let step = j.lu().solve(&(-rhs)).ok_or(Error::JacobianSingular)?;
    if step.iter().any(|v| !v.is_finite()) {
        return Err(Error::JacobianSingular);
    }
    Ok(step)
}

fn finish(problem: &VStateProblem, r0: f64, a: &[f64], omega: f64, res: f64, it: usize, tol: f64) -> Result<VStateSolution> {
    let patch = problem.patch(r0, a)?;
    let certificate = boundary_residual(&patch, omega, 2 * problem.nodes)?;
    if certificate > 2.0 * res.max(tol) {
        return Err(Error::MaxIterExceeded { iterations: it, residual: certificate });
    }
    Ok(VStateSolution {
        patch,
        omega,
        m: problem.m,
        nodes: problem.nodes,
        residual: res,
        certificate,
        amplitude: a.first().copied().unwrap_or(0.0),
        iterations: it,
    })
}

/// Newton iteration with the leading amplitude held at `amplitude`; the
/// unknowns are `Ω` and the remaining amplitudes.
pub fn newton_solve_at_amplitude(
    problem: &VStateProblem,
    initial: &PatchBoundary,
    omega_guess: f64,
    amplitude: f64,
    opts: &NewtonOptions,
) -> Result<VStateSolution> {
    let (r0, mut a) = problem.project(initial)?;
    a[0] = amplitude;
    let mut omega = omega_guess;
    let dim = a.len();
    // x = (Ω, a_2, ..., a_M)
    let unpack = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut amps = vec![amplitude];
        amps.extend_from_slice(&x[1..]);
        (x[0], amps)
    };
    for it in 0..=opts.max_iter {
        let (f, res) = problem.equations(r0, &a, omega)?;
        if res <= opts.tol {
            return finish(problem, r0, &a, omega, res, it, opts.tol);
        }
        if it == opts.max_iter {
            return Err(Error::MaxIterExceeded { iterations: it, residual: res });
        }
        let mut x = vec![omega];
        x.extend_from_slice(&a[1..]);
        let jac = jacobian(dim, &f, |k, h| {
            let mut y = x.clone();
            y[k] += h;
            let (w, amps) = unpack(&y);
            problem.equations(r0, &amps, w).map(|e| e.0)
        }, |k| x[k])?;
        let step = lu_step(jac, DVector::from_vec(f))?;
        for (v, d) in x.iter_mut().zip(step.iter()) {
            *v += d;
        }
        let (w, amps) = unpack(&x);
        if !(w > 0.0 && w < 0.5) {
            return Err(Error::InvalidOmega(w));
        }
        omega = w;
        a = amps;
    }
    unreachable!()
}

/// Parameter schedule of a continuation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Fixed `Ω` values; the amplitudes are solved for.
    Omega { values: Vec<f64> },
    /// Fixed leading amplitudes; `Ω` and the other amplitudes are solved for.
    Amplitude { values: Vec<f64>, omega_guess: f64 },
}

impl Schedule {
    fn values(&self) -> &[f64] {
        match self {
            Self::Omega { values } | Self::Amplitude { values, .. } => values,
        }
    }
}

/// Why a branch ended early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStop {
    pub step: usize,
    pub parameter: f64,
    pub reason: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub solutions: Vec<VStateSolution>,
    pub stopped: Option<BranchStop>,
}

impl Branch {
    /// One JSON object per solution, newline separated.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.solutions {
            out.push_str(&s.to_json().to_string());
            out.push('\n');
        }
        out
    }
}

/// Follows a branch along `schedule`, seeding each step with the previous
/// solution. The first failing step ends the run; the solutions found so far
/// are kept and the failure is reported in `stopped`.
pub fn continuation_branch(
    m: usize,
    modes: usize,
    initial: &PatchBoundary,
    schedule: &Schedule,
    opts: &NewtonOptions,
) -> Result<Branch> {
    let values = schedule.values();
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter("schedule must be strictly monotone".into()));
    }
    let mut solutions: Vec<VStateSolution> = Vec::new();
    let mut guess = initial.clone();
    let mut omega_prev = match schedule {
        Schedule::Omega { values } => values[0],
        Schedule::Amplitude { omega_guess, .. } => *omega_guess,
    };
    for (step, &v) in values.iter().enumerate() {
        let result = match schedule {
            Schedule::Omega { .. } => VStateProblem::new(v, m, modes, None).and_then(|p| newton_solve(&p, &guess, opts)),
            Schedule::Amplitude { .. } => VStateProblem::new(omega_prev, m, modes, None)
                .and_then(|p| newton_solve_at_amplitude(&p, &guess, omega_prev, v, opts)),
        };
        match result {
            Ok(s) => {
                guess = s.patch.clone();
                omega_prev = s.omega;
                solutions.push(s);
            }
            Err(e) if step > 0 || e.is_numerical() => {
                return Ok(Branch {
                    solutions,
                    stopped: Some(BranchStop { step, parameter: v, reason: e.reason(), message: e.to_string() }),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Branch { solutions, stopped: None })
}

/// A boundary sample ranked by `|∇ψ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub point: Point,
    pub grad_norm: f64,
    /// `|∇ψ|` below the scan threshold.
    pub candidate: bool,
}

fn ranked(mut pts: Vec<(Point, f64)>, threshold: f64) -> Vec<ScanPoint> {
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts.into_iter().map(|(point, g)| ScanPoint { point, grad_norm: g, candidate: g < threshold }).collect()
}

/// `|∇ψ|` at the solve-time boundary nodes, ascending.
pub fn singularity_scan(solution: &VStateSolution, threshold: f64) -> Result<Vec<ScanPoint>> {
    let q = ContourQuadrature::new(&solution.patch, solution.nodes)?;
    let g = q.gradient(solution.omega);
    Ok(ranked(q.nodes.iter().zip(g).map(|(n, g)| (n.point, g[0].hypot(g[1]))).collect(), threshold))
}

/// The same ranking for an arbitrary field sampled at given boundary points.
pub fn scan_field<F: PlanarField + ?Sized>(field: &F, points: &[Point], threshold: f64) -> Result<Vec<ScanPoint>> {
    let pts = points
        .iter()
        .map(|&p| field.gradient(p).map(|g| (p, g[0].hypot(g[1]))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ranked(pts, threshold))
}

/// Classical bifurcation speed `(m - 1)/(2m)` of the m-fold branch from the
/// unit disk, used only to seed initial guesses.
pub fn bifurcation_omega(m: usize) -> f64 {
    (m as f64 - 1.0) / (2.0 * m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kress_weights_integrate_log_kernel() {
        // ∫ log(4 sin²(t/2)) cos(k t) dt = -2π/k for k ≥ 1, 0 for k = 0
        let n = 32;
        let r = kress_weights(n);
        for k in 0..8 {
            let s: f64 = (0..n).map(|j| r[(n - j) % n] * (2.0 * PI * (k * j) as f64 / n as f64).cos()).sum();
            let expect = if k == 0 { 0.0 } else { -2.0 * PI / k as f64 };
            assert!((s - expect).abs() < 1e-12, "k={k}: {s}");
        }
    }
}
