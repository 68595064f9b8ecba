//! Degree-two homogeneous profiles `r² f(θ)` of the free-boundary problem.
//!
//! Such profiles solve the periodic ODE `-f'' - 4f = χ(θ)` where `χ = 1 - 2Ω`
//! on the patch arcs and `-2Ω` elsewhere. The operator has kernel
//! `span{cos 2θ, sin 2θ}`, so a solution exists only when `χ̂(±2) = 0`; the
//! remaining freedom is the kernel pair `(A, B)`, fitted to point constraints.
//!
//! Fourier convention: `χ̂(k) = (1/2π) ∫ χ(θ) e^{-ikθ} dθ`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, NotSolvableReason, Result};

/// Threshold on `|χ̂(2)|` above which the kernel obstruction is reported.
pub const KERNEL_TOL: f64 = 1e-10;
/// Largest allowed residual when fitting the kernel pair to constraints.
pub const MISMATCH_TOL: f64 = 1e-8;
/// Smallest truncation accepted by [`solve`].
pub const MIN_MODES: usize = 64;

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 && omega < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidOmega(omega))
    }
}

/// Patch arcs on the circle together with the angular velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularConfig {
    pub omega: f64,
    /// Sorted, pairwise disjoint arcs `(start, end)` with `0 <= start < end <= 2π`.
    pub arcs: Vec<(f64, f64)>,
}

impl AngularConfig {
    pub fn new(omega: f64, mut arcs: Vec<(f64, f64)>) -> Result<Self> {
        check_omega(omega)?;
        for &(s, e) in &arcs {
            if !(s.is_finite() && e.is_finite() && 0.0 <= s && s < e && e <= TAU) {
                return Err(Error::InvalidParameter(format!("arc ({s}, {e}) not inside [0, 2π]")));
            }
        }
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if arcs.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::InvalidParameter("patch arcs overlap".into()));
        }
        Ok(Self { omega, arcs })
    }

    /// Single arc `(0, θ₁)`; `θ₁ = 0` is the empty configuration.
    pub fn single(omega: f64, theta1: f64) -> Result<Self> {
        if theta1 == 0.0 {
            Self::new(omega, vec![])
        } else {
            Self::new(omega, vec![(0.0, theta1)])
        }
    }

    /// Value of `χ` at `θ` (arcs taken half-open, `[start, end)`).
    pub fn chi(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        if self.arcs.iter().any(|&(s, e)| s <= t && t < e) {
            1.0 - 2.0 * self.omega
        } else {
            -2.0 * self.omega
        }
    }

    /// Angles where `χ` jumps.
    pub fn jumps(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &(s, e) in &self.arcs {
            if s == 0.0 && e == TAU {
                continue;
            }
            for t in [s, e.rem_euclid(TAU)] {
                if !out.iter().any(|&u| circular_distance(u, t) < 1e-15) {
                    out.push(t);
                }
            }
        }
        // shared endpoints of adjacent arcs are not jumps
        out.retain(|&t| {
            let before = self.chi(t - 1e-9);
            let after = self.chi(t + 1e-9);
            before != after
        });
        out
    }

    /// Total angle covered by the arcs.
    pub fn patch_measure(&self) -> f64 {
        self.arcs.iter().map(|&(s, e)| e - s).sum()
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `e^{ix}`, exact when `x` is a multiple of `π/2` up to rounding of the
/// argument (so that quarter-turn arcs give exact zeros).
fn expi(x: f64) -> Complex64 {
    let q = x / (PI / 2.0);
    let n = q.round();
    if (q - n).abs() <= 4.0 * f64::EPSILON * n.abs().max(1.0) {
        return match (n as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, x)
}

/// Exact Fourier coefficient `χ̂(k)` of the configuration.
pub fn chi_hat(config: &AngularConfig, k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(-2.0 * config.omega + config.patch_measure() / TAU, 0.0);
    }
    let kf = k as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(s, e) in &config.arcs {
        acc += expi(-kf * s) - expi(-kf * e);
    }
    // the constant -2Ω has no k ≠ 0 content; only the jump 1 on the arcs remains
    acc / Complex64::new(0.0, TAU * kf)
}

/// A point condition on the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Value { theta: f64, value: f64 },
    Derivative { theta: f64, value: f64 },
}

impl Constraint {
    pub fn value(theta: f64, value: f64) -> Self {
        Self::Value { theta, value }
    }

    pub fn derivative(theta: f64, value: f64) -> Self {
        Self::Derivative { theta, value }
    }
}

/// Truncated Fourier solution `f = c0 + A cos 2θ + B sin 2θ + Σ_{k≠0,±2} f̂(k) e^{ikθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    pub config: AngularConfig,
    pub c0: f64,
    /// Coefficients `(A, B)` of `cos 2θ` and `sin 2θ`.
    pub kernel: (f64, f64),
    /// `modes[k - 1] = f̂(k)` for `k = 1..=K`; the entry for `k = 2` is zero.
    pub modes: Vec<Complex64>,
}

impl AngularProfile {
    /// Particular solution with zero kernel part.
    pub fn particular(config: &AngularConfig, k_max: usize) -> Result<Self> {
        let c2 = chi_hat(config, 2);
        if c2.norm() > KERNEL_TOL {
            return Err(Error::NotSolvable(NotSolvableReason::KernelObstruction));
        }
        let modes = (1..=k_max as i64)
            .map(|k| if k == 2 { Complex64::new(0.0, 0.0) } else { chi_hat(config, k) / (k * k - 4) as f64 })
            .collect();
        Ok(Self { config: config.clone(), c0: -chi_hat(config, 0).re / 4.0, kernel: (0.0, 0.0), modes })
    }

    pub fn k_max(&self) -> usize {
        self.modes.len()
    }

    /// `f`, `f'` and `f''` at `θ`.
    pub fn eval_all(&self, theta: f64) -> [f64; 3] {
        let (a, b) = self.kernel;
        let (s2, c2) = (2.0 * theta).sin_cos();
        let mut f = self.c0 + a * c2 + b * s2;
        let mut d1 = -2.0 * a * s2 + 2.0 * b * c2;
        let mut d2 = -4.0 * (a * c2 + b * s2);
        let rot = Complex64::from_polar(1.0, theta);
        let mut e = Complex64::new(1.0, 0.0);
        for (i, m) in self.modes.iter().enumerate() {
            e *= rot;
            if i % 64 == 63 {
                // refresh to keep the recurrence from drifting
                e = Complex64::from_polar(1.0, (i + 1) as f64 * theta);
            }
            let k = (i + 1) as f64;
            let z = m * e;
            f += 2.0 * z.re;
            d1 -= 2.0 * k * z.im;
            d2 -= 2.0 * k * k * z.re;
        }
        [f, d1, d2]
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.eval_all(theta)[0]
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.eval_all(theta)[1]
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.eval_all(theta)[2]
    }

    fn sample_count(&self) -> usize {
        4 * self.k_max().max(1)
    }

    /// `max |-f'' - 4f - χ|` over `4K` equispaced angles, skipping samples
    /// within `margin` of a jump of `χ` (where the truncated series has Gibbs
    /// oscillations of order one).
    pub fn ode_residual(&self, margin: f64) -> f64 {
        let jumps = self.config.jumps();
        let n = self.sample_count();
        (0..n)
            .map(|j| TAU * j as f64 / n as f64)
            .filter(|&t| jumps.iter().all(|&s| circular_distance(s, t) >= margin))
            .map(|t| {
                let [f, _, d2] = self.eval_all(t);
                (-d2 - 4.0 * f - self.config.chi(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |f(θ) - f(2π - θ)|` over `4K` angles.
    pub fn reflection_defect(&self) -> f64 {
        let n = self.sample_count();
        (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                (self.eval(t) - self.eval(TAU - t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `theta,f,chi` at `4K` equispaced angles.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "theta,f,chi")?;
        let n = self.sample_count();
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            writeln!(w, "{:?},{:?},{:?}", t, self.eval(t), self.config.chi(t))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let modes: Vec<_> = self
            .modes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1)
            .map(|(i, m)| json!({"k": i + 1, "re": m.re, "im": m.im}))
            .collect();
        json!({
            "omega": self.config.omega,
            "arcs": self.config.arcs,
            "K": self.k_max(),
            "c0": self.c0,
            "kernel": {"A": self.kernel.0, "B": self.kernel.1},
            "modes": modes,
        })
    }
}

/// Solves `-f'' - 4f = χ` with truncation `k_max` and fits the kernel pair to
/// the constraints in the least-squares sense (minimum norm when the
/// constraints leave a direction free).
pub fn solve(config: &AngularConfig, k_max: usize, constraints: &[Constraint]) -> Result<AngularProfile> {
    if k_max < MIN_MODES {
        return Err(Error::InvalidParameter(format!("truncation {k_max} below {MIN_MODES}")));
    }
    if constraints.len() > 4 {
        return Err(Error::InvalidConstraints(format!("{} constraints, at most 4 accepted", constraints.len())));
    }
    let mut p = AngularProfile::particular(config, k_max)?;
    if constraints.is_empty() {
        return Ok(p);
    }
    let n = constraints.len();
    let mut m = DMatrix::zeros(n, 2);
    let mut rhs = DVector::zeros(n);
    for (i, c) in constraints.iter().enumerate() {
        match *c {
            Constraint::Value { theta, value } => {
                let (s, co) = (2.0 * theta).sin_cos();
                m[(i, 0)] = co;
                m[(i, 1)] = s;
                rhs[i] = value - p.eval(theta);
            }
            Constraint::Derivative { theta, value } => {
                let (s, co) = (2.0 * theta).sin_cos();
                m[(i, 0)] = -2.0 * s;
                m[(i, 1)] = 2.0 * co;
                rhs[i] = value - p.derivative(theta);
            }
        }
    }
    let svd = m.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidConstraints(e.to_string()))?;
    let misfit = (&m * &x - &rhs).amax();
    if misfit > MISMATCH_TOL {
        return Err(Error::NotSolvable(NotSolvableReason::BoundaryMismatch));
    }
    p.kernel = (x[0], x[1]);
    Ok(p)
}

/// Single-arc angles `θ₁ ∈ {0, π, 2π}` that survive both the kernel test and
/// the sign test. The half-plane case `θ₁ = π` is rejected by
/// [`theta_pi_exclusion_witness`].
pub fn admissible_single_angles(omega: f64) -> Result<Vec<f64>> {
    check_omega(omega)?;
    let mut out = Vec::new();
    for theta1 in [0.0, PI, TAU] {
        let cfg = AngularConfig::single(omega, theta1)?;
        if chi_hat(&cfg, 2).norm() > KERNEL_TOL {
            continue;
        }
        if theta1 == PI && theta_pi_exclusion_witness(omega, 256)?.excluded {
            continue;
        }
        out.push(theta1);
    }
    Ok(out)
}

/// One member `f + B₂ sin 2θ` of the half-plane family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessSample {
    pub b2: f64,
    pub min_f: f64,
    pub max_f: f64,
    /// `max(-f)` on `(0, π)`; positive means `f >= 0` fails there.
    pub violation: f64,
    pub sign_change: bool,
}

/// Evidence that no half-plane profile (patch arc `(0, π)`, `f(0) = f(π) = 0`)
/// stays nonnegative on the patch arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaPiWitness {
    pub omega: f64,
    pub samples: Vec<WitnessSample>,
    /// Smallest violation over the family.
    pub min_violation: f64,
    /// For `B₂ = 0`, whether some `ξ` has `f(ξ) <= -(1 - 2Ω)/4`.
    pub deep_negative_at_zero: bool,
    pub excluded: bool,
}

/// Sweeps `B₂` over 201 values in `[-1, 1]` (which include `0`).
pub fn theta_pi_exclusion_witness(omega: f64, k_max: usize) -> Result<ThetaPiWitness> {
    check_omega(omega)?;
    if k_max < 256 {
        return Err(Error::InvalidParameter(format!("truncation {k_max} below 256")));
    }
    let cfg = AngularConfig::single(omega, PI)?;
    let base = solve(&cfg, k_max, &[Constraint::value(0.0, 0.0), Constraint::value(PI, 0.0)])?;
    let m = 4 * k_max;
    let interior: Vec<(f64, f64, f64)> = (1..m)
        .map(|j| {
            let t = PI * j as f64 / m as f64;
            (t, base.eval(t), (2.0 * t).sin())
        })
        .collect();
    let samples: Vec<WitnessSample> = (-100..=100)
        .map(|i| {
            let b2 = i as f64 / 100.0;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(_, f, s) in &interior {
                let v = f + b2 * s;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            WitnessSample { b2, min_f: lo, max_f: hi, violation: -lo, sign_change: lo < 0.0 && hi > 0.0 }
        })
        .collect();
    let zero = samples.iter().find(|s| s.b2 == 0.0).expect("grid contains zero");
    let deep_negative_at_zero = zero.min_f <= -(1.0 - 2.0 * omega) / 4.0;
    let min_violation = samples.iter().map(|s| s.violation).fold(f64::INFINITY, f64::min);
    let nonzero_ok = samples.iter().filter(|s| s.b2 != 0.0).all(|s| s.sign_change || s.violation > 0.0);
    Ok(ThetaPiWitness {
        omega,
        samples,
        min_violation,
        deep_negative_at_zero,
        excluded: min_violation > 0.0 && deep_negative_at_zero && nonzero_ok,
    })
}

/// `χ̂(k)` for `N` copies of the arc `(θ̃₁, θ̃₂)` rotated by multiples of `2π/N`.
/// The roots-of-unity sum makes it exactly zero when `N` does not divide `k`.
pub fn nfold_chi_hat(n: usize, t1: f64, t2: f64, omega: f64, k: i64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::InvalidFold(n));
    }
    if !(0.0 <= t1 && t1 < t2 && t2 <= TAU / n as f64 + 1e-15) {
        return Err(Error::InvalidParameter(format!("arc ({t1}, {t2}) not inside one sector of width 2π/{n}")));
    }
    if k == 0 {
        return Ok(Complex64::new(-2.0 * omega + n as f64 * (t2 - t1) / TAU, 0.0));
    }
    if k.rem_euclid(n as i64) != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kf = k as f64;
    let arc = (expi(-kf * t1) - expi(-kf * t2)) / Complex64::new(0.0, TAU * kf);
    Ok(arc * n as f64)
}

/// Whether `N` congruent patches, arranged with `N`-fold rotational symmetry
/// and touching at a single point with no vacuum sector between neighbours,
/// admit a degree-two homogeneous blow-up.
///
/// The blow-up cones then tile the circle, so `χ ≡ 1 - 2Ω` and every
/// `χ̂(k)`, `k ≠ 0`, vanishes (checked through [`nfold_chi_hat`]). Both
/// candidate blow-ups lie in `span{1, cos 2θ, sin 2θ}`: the harmonic
/// quadratics (zero constant) and the solutions `-(1-2Ω)/4 + A cos 2θ +
/// B sin 2θ`. A candidate must vanish on the `N` interface rays and be
/// invariant under rotation by `2π/N`; the kernel pair is fitted by least
/// squares and the fit residual decides.
///
/// Configurations with vacuum sectors between the patches are a different
/// problem; their corner angles are given by [`nfold_corner_angle`].
pub fn nfold_touching_possible(n: usize) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidFold(n));
    }
    let sector = TAU / n as f64;
    let probe = [0.05, 0.15, 0.25, 0.35, 0.45];
    for &omega in &probe {
        let higher = (1..=64).map(|k| nfold_chi_hat(n, 0.0, sector, omega, k)).collect::<Result<Vec<_>>>()?;
        if higher.iter().any(|c| c.norm() > KERNEL_TOL) {
            continue;
        }
        let c0 = -nfold_chi_hat(n, 0.0, sector, omega, 0)?.re / 4.0;
        // harmonic quadratic: constant 0, kernel pair normalised to unit length
        if fold_fit(n, 0.0, true) <= MISMATCH_TOL || fold_fit(n, c0, false) <= MISMATCH_TOL {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Residual of the best `c + A cos 2θ + B sin 2θ` vanishing on the rays
/// `2πj/N` and invariant under rotation by `2π/N`. With `normalized`, the pair
/// `(A, B)` is constrained to the unit circle (searched over its angle).
fn fold_fit(n: usize, c: f64, normalized: bool) -> f64 {
    let delta = TAU / n as f64;
    let rays: Vec<f64> = (0..n).map(|j| delta * j as f64).collect();
    let probes: Vec<f64> = (0..8).map(|j| 0.3 + 0.7 * j as f64).collect();
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for &t in &rays {
        let (s, co) = (2.0 * t).sin_cos();
        rows.push([co, s, -c]);
    }
    for &t in &probes {
        let (s0, c0) = (2.0 * t).sin_cos();
        let (s1, c1) = (2.0 * (t + delta)).sin_cos();
        rows.push([c1 - c0, s1 - s0, 0.0]);
    }
    if normalized {
        // minimise over unit (A, B) = (cos φ, sin φ): smallest singular value
        let m = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
        let sv = m.singular_values();
        return sv.min();
    }
    let m = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r[2]));
    let x = m.clone().svd(true, true).solve(&rhs, 1e-12).expect("thin SVD solve");
    (&m * &x - &rhs).amax()
}

/// Patch-arc width `θ̃₂` of the `N`-fold corner configuration, root of
/// `g(θ) = 2Ω tan(2π/N - θ) - (1 - 2Ω) tan θ` (the `C¹` matching of the patch
/// and vacuum pieces across a touching ray, with `θ̃₂ + θ̃_{2N} = 2π/N`).
pub fn nfold_corner_angle(omega: f64, n: usize) -> Result<f64> {
    check_omega(omega)?;
    if n < 3 {
        return Err(Error::InvalidFold(n));
    }
    let width = TAU / n as f64;
    let g = |t: f64| 2.0 * omega * (width - t).tan() - (1.0 - 2.0 * omega) * t.tan();
    let eps = 1e-14;
    let mut lo = (width - PI / 2.0).max(0.0) + eps;
    let mut hi = (PI / 2.0).min(width) - eps;
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo.is_finite() && ghi.is_finite()) || glo.signum() == ghi.signum() {
        return Err(Error::NoRoot(format!("g({lo}) = {glo}, g({hi}) = {ghi}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if g(lo).abs() < g(hi).abs() { lo } else { hi };
    let r = g(root).abs();
    if r > 1e-12 {
        return Err(Error::NoRoot(format!("bisection stalled with |g| = {r:e}")));
    }
    Ok(root)
}

/// The two reflection-symmetric point-touch profiles of a vortex pair: the
/// full-patch one `-((1-2Ω)/4)(1 - cos 2θ)` (`χ ≡ 1-2Ω`, double zero on the
/// touching line) and the degenerate-ray one `(Ω/2)(1 + cos 2θ)` (`χ ≡ -2Ω`,
/// vanishing on the normal direction).
pub fn pair_point_touch_profiles(omega: f64) -> Result<Vec<AngularProfile>> {
    check_omega(omega)?;
    let full = AngularConfig::new(omega, vec![(0.0, TAU)])?;
    let empty = AngularConfig::new(omega, vec![])?;
    Ok(vec![
        solve(&full, MIN_MODES, &[Constraint::value(0.0, 0.0), Constraint::derivative(0.0, 0.0)])?,
        solve(&empty, MIN_MODES, &[Constraint::value(PI / 2.0, 0.0), Constraint::derivative(0.0, 0.0)])?,
    ])
}

/// The segment-touch profile: patch arc `(π/2, 3π/2)`, `f(2π - θ) = f(θ)`
/// (imposed as `f'(0) = 0`) and `f(π/2) = 0`. Only odd modes are nonzero;
/// the truncation keeps `odd_modes` of them.
pub fn pair_segment_profile(omega: f64, odd_modes: usize) -> Result<AngularProfile> {
    check_omega(omega)?;
    if odd_modes < 1024 {
        return Err(Error::InvalidParameter(format!("{odd_modes} odd modes, at least 1024 required")));
    }
    let cfg = AngularConfig::new(omega, vec![(PI / 2.0, 1.5 * PI)])?;
    solve(&cfg, 2 * odd_modes, &[Constraint::value(PI / 2.0, 0.0), Constraint::derivative(0.0, 0.0)])
}

/// `f(π)` of [`pair_segment_profile`]. It is negative for every `Ω`, which
/// contradicts `f >= 0` inside the patch arc.
pub fn pair_segment_f_at_pi(omega: f64, odd_modes: usize) -> Result<f64> {
    Ok(pair_segment_profile(omega, odd_modes)?.eval(PI))
}
