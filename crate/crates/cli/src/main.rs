//! `vpatch` command-line front end. All angles are in radians.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use vpatch::angular::{solve as solve_angular, AngularConfig, Constraint};
use vpatch::blowup::{classify, rate_probe, ClassifyOptions};
use vpatch::cone::ConePotential;
use vpatch::vstate::{continuation_branch, newton_solve, NewtonOptions, Schedule, VStateProblem};
use vpatch::weiss::weiss_profile;
use vpatch::{acceptance, relative_stream, BoxRegion, Error, PatchBoundary, Point, Result, ScalarField, Synthetic};

#[derive(Parser)]
#[command(name = "vpatch", version, about = "Rotating vortex patch toolkit (angles in radians)")]
struct Cli {
    /// Seed for any randomized step (no current command draws random numbers).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton solve for an m-fold V-state at fixed angular velocity.
    Solve(SolveArgs),
    /// Continuation along a V-state branch; writes JSON lines.
    Branch(BranchArgs),
    /// Weiss energy profile of a sampled field.
    Weiss(WeissArgs),
    /// Blow-up classification of a point of a sampled field.
    Blowup(BlowupArgs),
    /// Degree-two homogeneous profile on the circle for given patch arcs.
    Angular(AngularArgs),
    /// Generalized Newtonian potential of the quadrant.
    ConePotential(ConeArgs),
    /// Relative stream function of a patch (or a synthetic expression) on a grid.
    Field(FieldArgs),
    /// Runs the acceptance checks; nonzero exit if any fails.
    CheckAll(CheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    omega: f64,
    /// Initial relative amplitude of cos(mθ) on the unit disk.
    #[arg(long, default_value_t = 0.02)]
    amplitude: f64,
    /// Initial patch JSON (overrides --amplitude).
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    modes: usize,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    /// Plain Newton, without deflating the disk.
    #[arg(long)]
    no_deflate: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Parameter {
    Omega,
    Amplitude,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long)]
    m: usize,
    /// Continuation parameter.
    #[arg(long, value_enum, default_value = "omega")]
    parameter: Parameter,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Seed amplitude for an omega schedule.
    #[arg(long, default_value_t = 0.02)]
    amplitude: f64,
    /// Starting angular velocity for an amplitude schedule
    /// (default: the bifurcation value (m-1)/(2m)).
    #[arg(long)]
    omega_guess: Option<f64>,
    #[arg(long, default_value_t = 24)]
    modes: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WeissArgs {
    #[arg(long)]
    field: PathBuf,
    /// Base point as `x1,x2`.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    #[arg(long, default_value_t = 0.05)]
    rmin: f64,
    #[arg(long, default_value_t = 0.4)]
    rmax: f64,
    #[arg(long, default_value_t = 16)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// Comma-separated scales.
    #[arg(long, default_value = "0.5,0.25,0.125,0.0625,0.03125")]
    scales: String,
    /// Also report the super-characteristic convergence rates.
    #[arg(long)]
    rates: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AngularArgs {
    #[arg(long)]
    omega: f64,
    /// Patch arc `start:end`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    arc: Vec<String>,
    /// Constraint f(θ) = v as `θ:v`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    value: Vec<String>,
    /// Constraint f'(θ) = v as `θ:v`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    derivative: Vec<String>,
    #[arg(long, default_value_t = 512)]
    modes: usize,
    /// JSON of the modes (stdout if absent).
    #[arg(long)]
    json: Option<PathBuf>,
    /// CSV of θ, f, χ.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value_t = 512)]
    modes: usize,
    #[arg(long)]
    json: Option<PathBuf>,
    /// CSV dump of z on the square of half-width --half-width.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    h: f64,
}

#[derive(Args)]
struct FieldArgs {
    /// Patch JSON file.
    #[arg(long, group = "source")]
    patch: Option<PathBuf>,
    #[arg(long, group = "source")]
    disk: Option<f64>,
    /// Semi-axes as `a,b`.
    #[arg(long, group = "source")]
    ellipse: Option<String>,
    /// Inner radius of the annulus b < |x| < 1.
    #[arg(long, group = "source")]
    annulus: Option<f64>,
    /// Closed-form expression id (sampled analytically).
    #[arg(long, group = "source")]
    synthetic: Option<String>,
    #[arg(long, default_value_t = 0.25)]
    omega: f64,
    /// Scale parameter of synthetic expressions.
    #[arg(long)]
    scale: Option<f64>,
    /// Box as `xmin,xmax,ymin,ymax`.
    #[arg(long = "box", default_value = "-3,3,-3,3", allow_hyphen_values = true)]
    bx: String,
    #[arg(long, default_value_t = 1.0 / 128.0)]
    h: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated check ids (default: all).
    #[arg(long)]
    only: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&Error::InvalidParameter("--threads must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::InvalidParameter(e.to_string()));
        }
    }
    let _ = cli.seed;
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Branch(a) => cmd_branch(a),
        Command::Weiss(a) => cmd_weiss(a),
        Command::Blowup(a) => cmd_blowup(a),
        Command::Angular(a) => cmd_angular(a),
        Command::ConePotential(a) => cmd_cone(a),
        Command::Field(a) => cmd_field(a),
        Command::CheckAll(a) => return cmd_check_all(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", json!({"reason": e.reason(), "message": e.to_string()}));
    ExitCode::from(if e.is_numerical() { 3 } else { 2 })
}

fn parse_list(s: &str, sep: char, what: &str) -> Result<Vec<f64>> {
    s.split(sep)
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number `{t}` in {what}"))))
        .collect()
}

fn parse_point(s: &str) -> Result<Point> {
    match parse_list(s, ',', "point")?.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => Err(Error::InvalidParameter(format!("point `{s}` must be `x1,x2`"))),
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    match parse_list(s, ':', what)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::InvalidParameter(format!("{what} `{s}` must be `a:b`"))),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            serde_json::to_writer_pretty(&mut w, v)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => println!("{}", serde_json::to_string_pretty(v)?),
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let problem = VStateProblem::new(a.omega, a.m, a.modes, a.nodes)?;
    let initial = match &a.initial {
        Some(p) => PatchBoundary::from_json(&read_json(p)?)?,
        None => seed_patch(a.m, a.amplitude)?,
    };
    let opts = NewtonOptions { tol: a.tol, max_iter: a.max_iter, deflate: !a.no_deflate };
    let s = newton_solve(&problem, &initial, &opts)?;
    write_json(a.out.as_deref(), &s.to_json())
}

fn seed_patch(m: usize, amplitude: f64) -> Result<PatchBoundary> {
    if m < 2 {
        return Err(Error::InvalidFold(m));
    }
    let mut cos = vec![0.0; m];
    cos[m - 1] = amplitude;
    PatchBoundary::fourier(1.0, [0.0, 0.0], cos, vec![])
}

fn cmd_branch(a: BranchArgs) -> Result<()> {
    if a.steps < 1 {
        return Err(Error::InvalidParameter("--steps must be at least 1".into()));
    }
    let values: Vec<f64> = if a.steps == 1 {
        vec![a.from]
    } else {
        (0..a.steps).map(|k| a.from + (a.to - a.from) * k as f64 / (a.steps - 1) as f64).collect()
    };
    let (schedule, initial) = match a.parameter {
        Parameter::Omega => (Schedule::Omega { values }, seed_patch(a.m, a.amplitude)?),
        Parameter::Amplitude => {
            let omega_guess = a.omega_guess.unwrap_or_else(|| vpatch::vstate::bifurcation_omega(a.m));
            (Schedule::Amplitude { values, omega_guess }, seed_patch(a.m, a.from)?)
        }
    };
    let opts = NewtonOptions { tol: a.tol, max_iter: a.max_iter, deflate: true };
    let branch = continuation_branch(a.m, a.modes, &initial, &schedule, &opts)?;
    let lines = branch.to_json_lines();
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(lines.as_bytes())?;
            w.flush()?;
        }
        None => print!("{lines}"),
    }
    let summary = json!({"solutions": branch.solutions.len(), "stopped": branch.stopped});
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn load_field(path: &Path) -> Result<ScalarField> {
    ScalarField::from_json(&read_json(path)?)
}

fn cmd_weiss(a: WeissArgs) -> Result<()> {
    let field = load_field(&a.field)?;
    let prof = weiss_profile(&field, parse_point(&a.x0)?, a.rmin, a.rmax, a.count)?;
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            prof.write_csv(&mut w)?;
            w.flush()?;
        }
        None => prof.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_blowup(a: BlowupArgs) -> Result<()> {
    let field = load_field(&a.field)?;
    let x0 = parse_point(&a.x0)?;
    let scales = parse_list(&a.scales, ',', "scales")?;
    let c = classify(&field, x0, &scales, &ClassifyOptions::default())?;
    let mut report = c.to_json();
    if a.rates {
        report["rates"] = json!(rate_probe(&field, x0, &scales)?);
    }
    write_json(a.out.as_deref(), &report)
}

fn cmd_angular(a: AngularArgs) -> Result<()> {
    let arcs = a.arc.iter().map(|s| parse_pair(s, "arc")).collect::<Result<Vec<_>>>()?;
    let mut constraints = Vec::new();
    for s in &a.value {
        let (t, v) = parse_pair(s, "value constraint")?;
        constraints.push(Constraint::value(t, v));
    }
    for s in &a.derivative {
        let (t, v) = parse_pair(s, "derivative constraint")?;
        constraints.push(Constraint::derivative(t, v));
    }
    let cfg = AngularConfig::new(a.omega, arcs)?;
    let profile = solve_angular(&cfg, a.modes, &constraints)?;
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        profile.write_csv(&mut w)?;
        w.flush()?;
    }
    write_json(a.json.as_deref(), &profile.to_json())
}

fn cmd_cone(a: ConeArgs) -> Result<()> {
    let pot = ConePotential::build(a.omega, a.modes)?;
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        pot.write_csv(&BoxRegion::square(a.half_width)?, a.h, &mut w)?;
        w.flush()?;
    }
    let mut v = pot.to_json();
    let reports = [1.0, 0.5, 0.25].iter().map(|&s| pot.projection_report(s)).collect::<Result<Vec<_>>>()?;
    v["projections"] = serde_json::to_value(reports)?;
    write_json(a.json.as_deref(), &v)
}

fn cmd_field(a: FieldArgs) -> Result<()> {
    let b = parse_list(&a.bx, ',', "box")?;
    let [xmin, xmax, ymin, ymax] = b[..] else {
        return Err(Error::InvalidParameter(format!("box `{}` must be `xmin,xmax,ymin,ymax`", a.bx)));
    };
    let bx = BoxRegion::new(xmin, xmax, ymin, ymax)?;
    let field = if let Some(id) = &a.synthetic {
        let mut params = json!({"omega": a.omega});
        if let Some(s) = a.scale {
            params["scale"] = json!(s);
        }
        Synthetic::from_id(id, &params)?.sample(&bx, a.h)?
    } else {
        let patch = if let Some(p) = &a.patch {
            PatchBoundary::from_json(&read_json(p)?)?
        } else if let Some(r) = a.disk {
            PatchBoundary::disk(r)?
        } else if let Some(e) = &a.ellipse {
            match parse_list(e, ',', "ellipse")?.as_slice() {
                [x, y] => PatchBoundary::ellipse(*x, *y)?,
                _ => return Err(Error::InvalidParameter(format!("ellipse `{e}` must be `a,b`"))),
            }
        } else if let Some(b) = a.annulus {
            PatchBoundary::annulus(b)?
        } else {
            return Err(Error::InvalidParameter(
                "one of --patch, --disk, --ellipse, --annulus, --synthetic is required".into(),
            ));
        };
        relative_stream(&patch, a.omega, &bx, a.h)?
    };
    let mut w = create(&a.out)?;
    serde_json::to_writer(&mut w, &field.to_json())?;
    w.flush()?;
    if let Some(p) = &a.csv {
        let mut w = create(p)?;
        field.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_check_all(a: CheckArgs) -> ExitCode {
    let ids: Vec<usize> = match &a.only {
        None => (1..=acceptance::CHECK_COUNT).collect(),
        Some(s) => match s.split(',').map(|t| t.trim().parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>() {
            Ok(v) if v.iter().all(|&i| (1..=acceptance::CHECK_COUNT).contains(&i)) => v,
            _ => return fail(&Error::InvalidParameter(format!("bad check list `{s}`"))),
        },
    };
    let mut all = true;
    for id in ids {
        let r = acceptance::run(id);
        println!("{}", r.line());
        all &= r.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
