//! End-to-end checks exercising every module at production resolution.
//!
//! Each check returns a [`CheckReport`]; a check that errors counts as failed.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use serde::Serialize;

use crate::angular::{
    nfold_corner_angle, nfold_touching_possible, pair_point_touch_profiles, pair_segment_f_at_pi, solve,
    theta_pi_exclusion_witness, AngularConfig, Constraint,
};
use crate::blowup::{classify, rate_probe, ClassifyOptions, Verdict};
use crate::cone::{ConePotential, DEFAULT_MODES};
use crate::error::{Error, NotSolvableReason, Result};
use crate::field::{relative_stream, BoxRegion, Synthetic};
use crate::geometry::PatchBoundary;
use crate::vstate::{boundary_residual, continuation_branch, newton_solve, ContourQuadrature, NewtonOptions, Schedule, VStateProblem};
use crate::weiss::{derivative_identity, weiss_profile, weiss_value};

pub const CHECK_COUNT: usize = 9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckReport {
    /// `PASS [3] angular solvability: ...`
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

/// Outcome of the individual comparisons inside one check.
struct Tally {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }
}

pub fn name(id: usize) -> &'static str {
    match id {
        1 => "weiss monotonicity",
        2 => "homogeneous constancy",
        3 => "angular solvability",
        4 => "cone potential",
        5 => "kirchhoff ellipse",
        6 => "solver sanity",
        7 => "classifier",
        8 => "pair and n-fold configurations",
        9 => "cross-solver consistency",
        _ => "unknown",
    }
}

pub fn run(id: usize) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let outcome = match id {
        1 => weiss_monotonicity(&mut t),
        2 => homogeneous_constancy(&mut t),
        3 => angular_solvability(&mut t),
        4 => cone_potential(&mut t),
        5 => kirchhoff(&mut t),
        6 => solver_sanity(&mut t),
        7 => classifier(&mut t),
        8 => pair_and_nfold(&mut t),
        9 => cross_solver(&mut t),
        _ => Err(Error::InvalidParameter(format!("no check {id}"))),
    };
    if let Err(e) = outcome {
        t.failures.push(format!("error: {e}"));
    }
    let passed = t.failures.is_empty();
    let detail = if passed { t.notes.join("; ") } else { t.failures.join("; ") };
    CheckReport { id, name: name(id), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all() -> Vec<CheckReport> {
    (1..=CHECK_COUNT).map(run).collect()
}

fn weiss_monotonicity(t: &mut Tally) -> Result<()> {
    let disk = PatchBoundary::disk(1.0)?;
    let f = relative_stream(&disk, 0.25, &BoxRegion::square(3.0)?, 1.0 / 256.0)?;
    let prof = weiss_profile(&f, [1.0, 0.0], 0.05, 0.4, 16)?;
    let scale = prof.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    t.check(prof.is_nondecreasing(1e-3 * scale), format!("max decrease {:.2e} vs slack {:.2e}", prof.max_decrease(), 1e-3 * scale));
    let id = derivative_identity(&f, [1.0, 0.0], 0.1, 0.3)?;
    let rel = id.residual / id.lhs.abs();
    t.check(rel <= 0.02, format!("identity relative residual {rel:.2e}"));
    Ok(())
}

fn homogeneous_constancy(t: &mut Tally) -> Result<()> {
    for (label, field) in [
        ("Ω x2²", Synthetic::CuspRay { omega: 0.25 }),
        ("-(1-2Ω) x2²/2", Synthetic::CuspComplement { omega: 0.25 }),
    ] {
        let v = [0.1, 0.2, 0.4].iter().map(|&r| weiss_value(&field, [0.0, 0.0], r)).collect::<Result<Vec<_>>>()?;
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        t.check(spread <= 1e-6, format!("{label}: spread {spread:.1e}"));
    }
    Ok(())
}

fn angular_solvability(t: &mut Tally) -> Result<()> {
    let w = 0.25;
    let mut wrong = Vec::new();
    for k in 1..=62 {
        let theta = 0.1 * k as f64;
        let near = (theta - PI).abs() < 1e-9 || (theta - TAU).abs() < 1e-9;
        let res = solve(&AngularConfig::single(w, theta)?, 256, &[]);
        let obstructed = matches!(res, Err(Error::NotSolvable(NotSolvableReason::KernelObstruction)));
        if obstructed == near {
            wrong.push(k);
        }
    }
    t.check(wrong.is_empty(), format!("62 angles, unexpected outcomes at k = {wrong:?}"));
    let zero = [Constraint::value(0.0, 0.0), Constraint::derivative(0.0, 0.0)];
    let p = solve(&AngularConfig::single(w, 0.0)?, 64, &zero)?;
    let q = solve(&AngularConfig::single(w, TAU)?, 64, &zero)?;
    let (mut ep, mut eq) = (0.0f64, 0.0f64);
    for j in 0..720 {
        let th = TAU * j as f64 / 720.0;
        let c = 1.0 - (2.0 * th).cos();
        ep = ep.max((p.eval(th) - w / 2.0 * c).abs());
        eq = eq.max((q.eval(th) + (1.0 - 2.0 * w) / 4.0 * c).abs());
    }
    t.check(ep <= 1e-10 && eq <= 1e-10, format!("closed forms to {:.1e}", ep.max(eq)));
    for omega in [0.05, 0.15, 0.25, 0.35, 0.45] {
        let wit = theta_pi_exclusion_witness(omega, 256)?;
        t.check(wit.excluded, format!("θ₁ = π excluded at Ω = {omega}"));
    }
    Ok(())
}

fn cone_potential(t: &mut Tally) -> Result<()> {
    let pot = ConePotential::build(0.25, DEFAULT_MODES)?;
    let h = 1.0 / 256.0;
    let lap = pot.laplacian_residual(&BoxRegion::square(1.0)?, h, 4.0 * h)?;
    t.check(lap <= 5e-2, format!("laplacian residual {lap:.2e}"));
    let mut scaling = 0.0f64;
    for k in 0..64 {
        let th = 0.1 + TAU * k as f64 / 64.0;
        let rho = 0.2 + 0.8 * ((k * 37) % 64) as f64 / 64.0;
        for s in [0.5, 0.25, 0.1] {
            let x = [rho * th.cos(), rho * th.sin()];
            scaling = scaling.max(pot.scaling_defect(x, s).abs());
        }
    }
    t.check(scaling <= 1e-12, format!("scaling defect {scaling:.1e}"));
    let p1 = pot.projection_report(1.0)?;
    t.check(p1.pi.a.abs().max(p1.pi.b.abs()) <= 1e-8, format!("Π(z) = ({:.1e}, {:.1e})", p1.pi.a, p1.pi.b));
    let half = pot.projection_report(0.5)?;
    let want = -2.0 * pot.log_b * 2f64.ln();
    t.check((half.pi.b - want).abs() <= 1e-10 && half.pi.a.abs() <= 1e-10, format!("Π(z_1/2) b = {:.12}", half.pi.b));
    let quarter = pot.projection_report(0.25)?;
    // τ(z_s) = c |log s|: doubling |log s| doubles τ
    let lin = (quarter.tau - 2.0 * half.tau).abs();
    t.check(lin <= 1e-9, format!("log-linearity defect {lin:.1e}"));
    Ok(())
}

fn kirchhoff(t: &mut Tally) -> Result<()> {
    let e = PatchBoundary::ellipse(2.0, 1.0)?;
    let on = boundary_residual(&e, 2.0 / 9.0, 512)?;
    t.check(on <= 1e-6, format!("residual at 2/9 {on:.1e}"));
    let off = boundary_residual(&e, 0.4, 512)?;
    t.check(off > 1e-2, format!("residual at 0.4 {off:.2e}"));
    let init = PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.0, 0.03], vec![])?;
    let values = (1..=10).map(|k| 0.03 * k as f64).collect();
    let branch = continuation_branch(2, 24, &init, &Schedule::Amplitude { values, omega_guess: 0.24 }, &NewtonOptions::default())?;
    t.check(branch.stopped.is_none() && branch.solutions.len() == 10, format!("{} branch points", branch.solutions.len()));
    let worst = branch
        .solutions
        .iter()
        .map(|s| {
            let (a, b) = s.axes();
            (s.omega - a * b / (a + b).powi(2)).abs()
        })
        .fold(0.0, f64::max);
    t.check(worst <= 1e-6, format!("|Ω - ab/(a+b)²| ≤ {worst:.1e}"));
    Ok(())
}

fn solver_sanity(t: &mut Tally) -> Result<()> {
    let d = PatchBoundary::disk(1.0)?;
    let mut worst = 0.0f64;
    for omega in [0.1, 0.2, 0.3, 0.4] {
        for m in [2, 3, 4] {
            let s = newton_solve(&VStateProblem::new(omega, m, 8, None)?, &d, &NewtonOptions::default())?;
            worst = s.amplitudes().iter().fold(worst, |w, a| w.max(a.abs()));
        }
    }
    t.check(worst <= 1e-12, format!("disk amplitude {worst:.1e}"));
    let p = VStateProblem::new(1.0 / 3.0 - 0.01, 3, 24, None)?;
    let init = PatchBoundary::fourier(1.0, [0.0, 0.0], vec![0.0, 0.0, 0.02], vec![])?;
    let s = newton_solve(&p, &init, &NewtonOptions { max_iter: 12, ..Default::default() })?;
    t.check(
        s.residual <= 1e-10 && s.iterations <= 12 && s.amplitude.abs() > 1e-3,
        format!("3-fold: residual {:.1e} after {} steps, amplitude {:.4}", s.residual, s.iterations, s.amplitude),
    );
    Ok(())
}

fn classifier(t: &mut Tally) -> Result<()> {
    let scales: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
    let opts = ClassifyOptions::default();
    let corner = Synthetic::CornerLog { omega: 0.25 }.sample(&BoxRegion::square(0.625)?, 1.0 / 1024.0)?;
    let c = classify(&corner, [0.0, 0.0], &scales, &opts)?;
    let orient_ok = matches!(c.verdict, Verdict::Corner90 { orientation_deg } if orientation_deg.abs() <= 1.0);
    let dens = c.evidence.density.iter().fold(0.0f64, |m, d| m.max((d - 0.25).abs()));
    t.check(orient_ok && dens <= 1e-3, format!("corner: {:?}, density error {dens:.1e}", c.verdict));
    let bx = BoxRegion::square(0.625)?;
    for field in [Synthetic::CuspRay { omega: 0.25 }, Synthetic::CuspComplement { omega: 0.25 }] {
        let c = classify(&field.sample(&bx, 1.0 / 512.0)?, [0.0, 0.0], &scales, &opts)?;
        let ok = matches!(c.verdict, Verdict::Cusp0 { .. } | Verdict::DegenerateEmpty | Verdict::DegenerateFull);
        t.check(ok, format!("cusp: {}", c.verdict.name()));
    }
    let rankine = relative_stream(&PatchBoundary::disk(1.0)?, 0.25, &BoxRegion::square(3.0)?, 1.0 / 128.0)?;
    let c = classify(&rankine, [1.0, 0.0], &scales, &opts)?;
    t.check(c.verdict == Verdict::NotSingular, format!("rankine: {}", c.verdict.name()));
    let probe: Vec<f64> = (2..=6).map(|k| 0.5f64.powi(k)).collect();
    let rates = rate_probe(&corner, [0.0, 0.0], &probe)?;
    t.check(rates.windows(2).all(|w| w[1] < w[0]), format!("rates {rates:.3?}"));
    Ok(())
}

fn pair_and_nfold(t: &mut Tally) -> Result<()> {
    let verdicts = (2..=8).map(nfold_touching_possible).collect::<Result<Vec<_>>>()?;
    let ok = verdicts.iter().enumerate().all(|(i, &v)| v == (i == 0));
    t.check(ok, format!("touching possible for N = 2..8: {verdicts:?}"));
    let q = nfold_corner_angle(0.25, 4)?;
    t.check((q - PI / 4.0).abs() <= 1e-10, format!("corner angle (1/4, 4) = {q:.12}"));
    let small = PI / 2.0 - nfold_corner_angle(1e-6, 4)?;
    t.check((small - PI / 2.0).abs() <= 1e-2, format!("vacuum width at Ω = 1e-6: {small:.6}"));
    for omega in [0.05, 0.25, 0.45] {
        let v = pair_segment_f_at_pi(omega, 1024)?;
        t.check(v < 0.0, format!("f(π) = {v:.6} at Ω = {omega}"));
    }
    let worst = pair_point_touch_profiles(0.25)?.iter().map(|p| p.ode_residual(0.0)).fold(0.0, f64::max);
    t.check(worst <= 1e-10, format!("point-touch ODE residual {worst:.1e}"));
    Ok(())
}

fn cross_solver(t: &mut Tally) -> Result<()> {
    let e = PatchBoundary::ellipse(2.0, 1.0)?;
    let omega = 2.0 / 9.0;
    let grid = relative_stream(&e, omega, &BoxRegion::new(-6.0, 6.0, -5.0, 5.0)?, 1.0 / 256.0)?;
    let q = ContourQuadrature::new(&e, 512)?;
    let psi = q.psi(omega);
    let mean = psi.iter().sum::<f64>() / psi.len() as f64;
    let mut worst = 0.0f64;
    for (node, c) in q.nodes.iter().zip(&psi) {
        worst = worst.max((grid.eval(node.point)? - (c - mean)).abs());
    }
    t.check(worst <= 5e-4, format!("sup difference {worst:.2e}"));
    Ok(())
}
