use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use varquad::equations::{detect_recursive, EquationFile, Factorization, HessianCoefficients, Recursion, RecursiveSpec};
use varquad::families::{Domain, Family, FamilySpec, Sampler};
use varquad::nonrec3::{detect3, Detect3, Kind};
use varquad::ode::{integrate, trajectory_csv, Options, Summary, SystemState, Termination, Trajectory};
use varquad::slag::{
    graph_map, joyce_integrate, joyce_map, joyce_residual, point_cloud_csv, quadric_phase,
};
use varquad::verify::{hessian_residual, lyz_residual, slag_residual, Grid, ResidualReport, TrajectorySampler};
use varquad::Error;

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INIT: u8 = 3;
const EXIT_INADMISSIBLE: u8 = 4;
const EXIT_NOT_APPLICABLE: u8 = 5;
const EXIT_TOLERANCE: u8 = 6;

/// Explicit solutions of Hessian equations from evolving quadrics.
///
/// Exit codes: 0 ok, 1 I/O, 2 parse or invalid input, 3 invalid initial state,
/// 4 inadmissible family parameters, 5 construction not applicable (prints the
/// required angle on a mismatch), 6 tolerance exceeded or numerical failure.
#[derive(Parser)]
#[command(name = "varquad", version)]
struct Cli {
    /// Seed for Monte-Carlo grids.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    atol: f64,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    /// Half-width of the cube in x.
    #[arg(long, default_value_t = 2.0)]
    x_half: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    s_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    s_max: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 21)]
    count: usize,
    /// Pass threshold on the scaled residual.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Also write the per-point residuals as CSV.
    #[arg(long)]
    points: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Recursive or non-recursive verdict and factored form of an equation file.
    Classify { equation: PathBuf },
    /// Integrate the ODE system from an initial state over [s-min, s-max].
    Solve {
        equation: PathBuf,
        /// JSON state {"s", "p", "R", "r", "rprime"}.
        #[arg(long)]
        init: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        s_max: f64,
    },
    /// Sample a closed-form family and check it against the phase equation.
    Family {
        family: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Residual of an equation on a family or on a solved trajectory.
    Verify {
        equation: PathBuf,
        #[arg(long, conflicts_with = "init", required_unless_present = "init")]
        family: Option<PathBuf>,
        /// Solve from this state over the grid's s-range and verify the result.
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Special Lagrangian side of a family.
    Slag {
        mode: SlagMode,
        family: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Extend mode: integrate the quadric data to |t| <= this (default: twice the graphical range).
        #[arg(long)]
        t_span: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SlagMode {
    Residual,
    Joyce,
    Extend,
    Pointcloud,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

type Outcome<T> = std::result::Result<T, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn angle_name(x: f64) -> String {
    let quarters = (x / (PI / 2.0)).round() as i64;
    match quarters.rem_euclid(4) {
        0 => "0".into(),
        1 => "π/2".into(),
        2 => "π".into(),
        _ => "3π/2".into(),
    }
}

fn code_of(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::ZeroPolynomial | Error::Underdetermined(_) | Error::InvalidIndex { .. } => {
            EXIT_PARSE
        }
        Error::InvalidStart(_) | Error::SingularField { .. } | Error::Degenerate { .. } => EXIT_INIT,
        Error::DomainBoundary { .. } => EXIT_INADMISSIBLE,
        Error::NotApplicable(_) | Error::AngleMismatch { .. } => EXIT_NOT_APPLICABLE,
        Error::BranchLoss { .. } | Error::BranchCollision { .. } | Error::InternalInconsistency(_) => EXIT_TOLERANCE,
    }
}

fn lift(e: Error) -> Failure {
    let message = match &e {
        Error::AngleMismatch { required } => {
            format!("angle mismatch: required θ = {} (e^{{iθ}}iⁿ = −i)", angle_name(*required))
        }
        _ => e.to_string(),
    };
    fail(code_of(&e), message)
}

struct Ctx {
    seed: u64,
    opts: Options,
    out: PathBuf,
}

impl Ctx {
    fn write(&self, name: &str, body: &str) -> Outcome<PathBuf> {
        fs::create_dir_all(&self.out).map_err(|e| fail(EXIT_IO, format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        fs::write(&path, body).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Outcome<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    serde_json::from_str(&read(path)?).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_equation(path: &Path) -> Outcome<(EquationFile, HessianCoefficients)> {
    let file: EquationFile = parse(path)?;
    let h = file.coefficients().map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok((file, h))
}

fn load_family(path: &Path) -> Outcome<Family> {
    let spec: FamilySpec = parse(path)?;
    Family::from_spec(&spec).map_err(|e| match e {
        Error::NotApplicable(m) => fail(EXIT_INADMISSIBLE, format!("inadmissible parameters: {m}")),
        Error::InvalidInput(m) => fail(EXIT_PARSE, format!("{}: {m}", path.display())),
        other => lift(other),
    })
}

fn load_state(path: &Path) -> Outcome<SystemState> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| fail(EXIT_INIT, format!("{}: {e}", path.display())))
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn fmt_roots(spec: &RecursiveSpec) -> String {
    let (r1, r2) = spec.roots();
    if r1.im != 0.0 {
        let im = if (r1.im.abs() - 1.0).abs() < 1e-12 { String::new() } else { fmt_num(r1.im.abs()) };
        if r1.re == 0.0 {
            format!("±{im}i")
        } else {
            format!("{}±{im}i", fmt_num(r1.re))
        }
    } else if r1 == r2 {
        format!("{} (double)", fmt_num(r1.re))
    } else {
        format!("{}, {}", fmt_num(r1.re), fmt_num(r2.re))
    }
}

fn fmt_factored(f: &Factorization) -> String {
    match *f {
        Factorization::DistinctReal { r1, r2, a, b } => format!(
            "F = {}·prod_j(p_j + {}) + {}·prod_j(p_j + {})",
            fmt_num(a),
            fmt_num(r1),
            fmt_num(b),
            fmt_num(r2)
        ),
        Factorization::ComplexPair { r1, a } => format!(
            "F = 2 Re[({} + {}i)·prod_j(p_j + ({} + {}i))]",
            fmt_num(a.re),
            fmt_num(a.im),
            fmt_num(r1.re),
            fmt_num(r1.im)
        ),
        Factorization::Repeated { u, a, b } => format!(
            "F = {}·prod_j(p_j + u) + {}·u d/du prod_j(p_j + u) at u = {}",
            fmt_num(a),
            fmt_num(b),
            fmt_num(u)
        ),
        Factorization::Monomial { c_nm1, c_n } => {
            format!("F = {}·sigma_n + {}·sigma_(n-1)", fmt_num(c_n), fmt_num(c_nm1))
        }
    }
}

fn case_number(f: &Factorization) -> u8 {
    match f {
        Factorization::DistinctReal { .. } | Factorization::ComplexPair { .. } => 1,
        Factorization::Repeated { .. } => 2,
        Factorization::Monomial { .. } => 3,
    }
}

fn classify(ctx: &Ctx, path: &Path) -> Outcome<()> {
    let (file, h) = load_equation(path)?;
    let n = h.n();
    let c = h.f_coeffs();
    let from_file = file.recursive_spec().ok();
    // For n = 3 the degeneracy c_3 c_1 = c_2^2 decides before any recursion search.
    let nonrec3 = match (n, from_file) {
        (3, None) => match detect3(&h).map_err(lift)? {
            Detect3::NonRecursive(case) => Some(case),
            Detect3::Recursive(_) => None,
        },
        _ => None,
    };
    let recursion = if n == 1 || nonrec3.is_some() {
        None
    } else if let Some(spec) = from_file {
        Some(Recursion::Unique { a0: spec.a0, a1: spec.a1, residual: 0.0 })
    } else {
        Some(detect_recursive(&h).map_err(lift)?)
    };
    let mut report = json!({ "n": n, "c_m1": h.c_m1(), "c": c });
    let line = match recursion.and_then(|r| r.pair().map(|p| (r, p))) {
        Some((rec, (a0, a1))) => {
            let spec = RecursiveSpec::new(n, a0, a1, c[n - 1], c[n]).map_err(lift)?;
            let fac = spec.classify();
            let head = match rec {
                Recursion::Family { .. } => format!("recursive family, representative ({},{})", fmt_num(a0), fmt_num(a1)),
                _ => format!("recursive, (a0, a1) = ({}, {})", fmt_num(a0), fmt_num(a1)),
            };
            let line = format!("{head}; Case {} roots {}; {}", case_number(&fac), fmt_roots(&spec), fmt_factored(&fac));
            let (r1, r2) = spec.roots();
            report["verdict"] = json!("recursive");
            report["recursion"] = json!(rec);
            report["a0"] = json!(a0);
            report["a1"] = json!(a1);
            report["case"] = json!(fac.case());
            report["roots"] = json!([[r1.re, r1.im], [r2.re, r2.im]]);
            report["factored"] = json!(fmt_factored(&fac));
            line
        }
        None if n == 1 => {
            let spec = RecursiveSpec::new(1, 0.0, 0.0, c[0], c[1]).map_err(lift)?;
            let fac = spec.classify();
            report["verdict"] = json!("recursive");
            report["recursion"] = json!("any pair (a0, a1)");
            report["factored"] = json!(fmt_factored(&fac));
            format!("n=1: every (a0, a1) is a recursion; {}", fmt_factored(&fac))
        }
        None => {
            report["verdict"] = json!("non_recursive");
            if let Some(case) = nonrec3 {
                let (kind, line) = match case.kind {
                    Kind::CubicShift { a } => (
                        json!({"kind": "cubic_shift", "a": a}),
                        format!(
                            "n=3 non-recursive, CubicShift a={}; F = {}·prod_j(p_j + a) + {}",
                            fmt_num(a),
                            fmt_num(c[3]),
                            fmt_num(c[0] - c[3] * a * a * a)
                        ),
                    ),
                    Kind::Linear => (
                        json!({"kind": "linear"}),
                        format!("n=3 non-recursive, Linear; F = {}·sigma_1 + {}", fmt_num(c[1]), fmt_num(c[0])),
                    ),
                };
                report["nonrec3"] = kind;
                line
            } else {
                format!("n={n} non-recursive")
            }
        }
    };
    report["summary"] = json!(line);
    println!("{line}");
    ctx.write_json("classify.json", &report)?;
    Ok(())
}

fn solve_range(
    h: &HessianCoefficients,
    init: &SystemState,
    s_min: f64,
    s_max: f64,
    opts: &Options,
) -> Outcome<(Option<Trajectory>, Option<Trajectory>)> {
    if !(s_min <= init.s && init.s <= s_max) {
        return Err(fail(EXIT_INIT, format!("initial s = {} lies outside [{s_min}, {s_max}]", init.s)));
    }
    init.validate(h.n()).map_err(|e| fail(EXIT_INIT, e.to_string()))?;
    let run = |end: f64| -> Outcome<Option<Trajectory>> {
        if end == init.s {
            return Ok(None);
        }
        integrate(h, init, end, opts).map(Some).map_err(|e| fail(EXIT_INIT, e.to_string()))
    };
    Ok((run(s_max)?, run(s_min)?))
}

/// Both directions as one trajectory in increasing s.
fn merge(h: &HessianCoefficients, fw: &Option<Trajectory>, bw: &Option<Trajectory>) -> Outcome<Option<Trajectory>> {
    let mut states: Vec<SystemState> = Vec::new();
    if let Some(b) = bw {
        states.extend(b.states().collect::<Vec<_>>().into_iter().rev());
    }
    if let Some(f) = fw {
        let skip = usize::from(!states.is_empty());
        states.extend(f.states().skip(skip));
    }
    if states.is_empty() {
        return Ok(None);
    }
    let term = fw.as_ref().or(bw.as_ref()).map(|t| t.termination).unwrap_or(Termination::ReachedEnd);
    Trajectory::from_states(h, &states, term).map(Some).map_err(lift)
}

fn csv_header(n: usize) -> String {
    let mut out = String::from("s");
    for prefix in ["p", "R"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}{i}");
        }
    }
    out.push_str(",r,rprime,rpp,F,kappa");
    for i in 1..=n {
        let _ = write!(out, ",xi{i}");
    }
    out.push('\n');
    out
}

fn solve(ctx: &Ctx, equation: &Path, init: &Path, s_min: f64, s_max: f64) -> Outcome<()> {
    let (file, h) = load_equation(equation)?;
    let spec = file.recursive_spec().ok().or_else(|| varquad::equations::spec_of(&h));
    let st = load_state(init)?;
    let (fw, bw) = solve_range(&h, &st, s_min, s_max, &ctx.opts)?;
    let merged = merge(&h, &fw, &bw)?;
    let csv = match &merged {
        Some(t) => trajectory_csv(t, &h, spec.as_ref()),
        None => csv_header(h.n()),
    };
    ctx.write("trajectory.csv", &csv)?;
    let summary = |t: &Option<Trajectory>| t.as_ref().map(|t| Summary::new(t, &h, spec.as_ref()));
    let (sf, sb) = (summary(&fw), summary(&bw));
    let describe = |name: &str, s: &Option<Summary>| match s {
        Some(s) => format!("{name}: {:?}", s.termination),
        None => format!("{name}: empty"),
    };
    println!("{}; {}", describe("forward", &sf), describe("backward", &sb));
    ctx.write_json("summary.json", &json!({ "forward": sf, "backward": sb }))?;
    Ok(())
}

/// The grid's s-range, pulled strictly inside a finite domain.
fn clip_s(grid: &GridArgs, domain: Domain) -> Outcome<(f64, f64)> {
    let (mut lo, mut hi) = (grid.s_min, grid.s_max);
    if let Domain::Interval { lo: a, hi: b } = domain {
        lo = lo.max(a);
        hi = hi.min(b);
        let margin = 0.05 * (hi - lo);
        if lo == a {
            lo += margin;
        }
        if hi == b {
            hi -= margin;
        }
    }
    if !(lo < hi) {
        return Err(fail(EXIT_PARSE, format!("empty s-range after clipping to the domain: [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

fn make_grid(ctx: &Ctx, n: usize, grid: &GridArgs, lo: f64, hi: f64) -> Outcome<Grid> {
    if grid.count < 2 {
        return Err(fail(EXIT_PARSE, "grid count must be at least 2"));
    }
    if !(grid.tol > 0.0) || !(grid.x_half > 0.0) {
        return Err(fail(EXIT_PARSE, "tolerance and x-half must be positive"));
    }
    Ok(Grid::cube(n, grid.x_half, lo, hi, grid.count, ctx.seed))
}

/// Writes the report (per-point residuals to CSV on request) and checks the tolerance.
fn finish_report(ctx: &Ctx, stem: &str, mut report: ResidualReport, extra: Value, grid: &GridArgs) -> Outcome<()> {
    if grid.points {
        let mut csv = String::from("residual\n");
        for r in &report.residuals {
            let _ = writeln!(csv, "{r:.16e}");
        }
        ctx.write(&format!("{stem}_residuals.csv"), &csv)?;
    }
    report.residuals.clear();
    let scaled = report.scaled_max;
    let mut body = serde_json::to_value(&report).expect("serializable");
    if let (Value::Object(map), Value::Object(more)) = (&mut body, extra) {
        map.extend(more);
    }
    ctx.write_json(&format!("{stem}_report.json"), &body)?;
    println!("{stem}: scaled_max = {scaled:e} (tolerance {:e})", grid.tol);
    if !(scaled <= grid.tol) {
        return Err(fail(EXIT_TOLERANCE, format!("scaled residual {scaled:e} exceeds {:e}", grid.tol)));
    }
    Ok(())
}

fn sample_csv(fam: &Family, lo: f64, hi: f64, count: usize) -> Outcome<String> {
    let n = fam.n;
    let mut out = String::from("s");
    for prefix in ["p", "dp", "q", "dq"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}{i}");
        }
    }
    out.push_str(",r,rp,rpp\n");
    for k in 0..count {
        let s = lo + (hi - lo) * k as f64 / (count - 1) as f64;
        let d = fam.at(s).map_err(lift)?;
        let row: Vec<String> = std::iter::once(s)
            .chain(d.p.iter().copied())
            .chain(d.dp.iter().copied())
            .chain(d.q.iter().copied())
            .chain(d.dq.iter().copied())
            .chain([d.r, d.rp, d.rpp])
            .map(|v| format!("{v:.16e}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn family_info(fam: &Family) -> Value {
    json!({
        "variant": fam.variant,
        "n": fam.n,
        "theta": fam.theta,
        "kappa": fam.kappa(),
        "domain": fam.domain(),
        "violations": fam.violations(),
    })
}

fn family(ctx: &Ctx, path: &Path, grid: &GridArgs) -> Outcome<()> {
    let fam = load_family(path)?;
    let (lo, hi) = clip_s(grid, fam.domain())?;
    ctx.write("family_samples.csv", &sample_csv(&fam, lo, hi, grid.count)?)?;
    let g = make_grid(ctx, fam.n, grid, lo, hi)?;
    let report = lyz_residual(fam.theta, &fam, &g).map_err(lift)?;
    if let Domain::Interval { lo, hi } = fam.domain() {
        println!("domain: ({lo}, {hi})");
    }
    finish_report(ctx, "family", report, json!({ "family": family_info(&fam) }), grid)
}

fn verify(ctx: &Ctx, equation: &Path, fam: Option<&Path>, init: Option<&Path>, grid: &GridArgs) -> Outcome<()> {
    let (_, h) = load_equation(equation)?;
    if let Some(path) = fam {
        let fam = load_family(path)?;
        if fam.n != h.n() {
            return Err(fail(EXIT_PARSE, format!("family has n = {}, equation has n = {}", fam.n, h.n())));
        }
        let (lo, hi) = clip_s(grid, fam.domain())?;
        let g = make_grid(ctx, fam.n, grid, lo, hi)?;
        let report = hessian_residual(&h, &fam, &g).map_err(lift)?;
        return finish_report(ctx, "verify", report, json!({ "family": family_info(&fam) }), grid);
    }
    let st = load_state(init.expect("clap requires --family or --init"))?;
    let (fw, bw) = solve_range(&h, &st, grid.s_min, grid.s_max, &ctx.opts)?;
    let traj = merge(&h, &fw, &bw)?.ok_or_else(|| fail(EXIT_PARSE, "empty s-range"))?;
    let (a, b) = (traj.s[0], traj.s[traj.len() - 1]);
    // Stay clear of a terminal singularity at either end.
    let margin = 0.02 * (b - a);
    let lo = if bw.as_ref().is_some_and(|t| t.termination != Termination::ReachedEnd) { a + margin } else { a };
    let hi = if fw.as_ref().is_some_and(|t| t.termination != Termination::ReachedEnd) { b - margin } else { b };
    let g = make_grid(ctx, h.n(), grid, lo, hi)?;
    let sampler = TrajectorySampler { h: &h, traj: &traj };
    let report = hessian_residual(&h, &sampler, &g).map_err(lift)?;
    finish_report(ctx, "verify", report, json!({ "trajectory_range": [a, b] }), grid)
}

fn s_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

fn slag(ctx: &Ctx, mode: SlagMode, path: &Path, grid: &GridArgs, t_span: Option<f64>) -> Outcome<()> {
    let fam = load_family(path)?;
    let (lo, hi) = clip_s(grid, fam.domain())?;
    match mode {
        SlagMode::Residual => {
            let g = make_grid(ctx, fam.n, grid, lo, hi)?;
            let report = slag_residual(fam.theta, &fam, &g).map_err(lift)?;
            finish_report(ctx, "slag", report, json!({ "family": family_info(&fam) }), grid)
        }
        SlagMode::Joyce => {
            let ss = s_samples(lo, hi, grid.count.max(2) * 10);
            let res = joyce_residual(&fam, fam.kappa(), fam.theta, &ss).map_err(lift)?;
            ctx.write_json("joyce_report.json", &json!({ "residual": res, "s_range": [lo, hi], "family": family_info(&fam) }))?;
            println!("joyce: max_abs = {:e}, scaled = {:e}", res.max_abs, res.scaled);
            if !(res.scaled <= grid.tol) {
                return Err(fail(EXIT_TOLERANCE, format!("Joyce residual {:e} exceeds {:e}", res.scaled, grid.tol)));
            }
            Ok(())
        }
        SlagMode::Pointcloud => {
            let pts = graph_cloud(&fam, grid, lo, hi)?;
            ctx.write("pointcloud.csv", &point_cloud_csv(&pts))?;
            println!("pointcloud: {} points", pts.len());
            Ok(())
        }
        SlagMode::Extend => extend(ctx, &fam, grid, t_span),
    }
}

fn graph_cloud(fam: &Family, grid: &GridArgs, lo: f64, hi: f64) -> Outcome<Vec<Vec<num_complex::Complex64>>> {
    let xs = s_samples(-grid.x_half, grid.x_half, grid.count);
    let mut pts = Vec::new();
    for s in s_samples(lo, hi, grid.count) {
        let d = fam.at(s).map_err(lift)?;
        for idx in 0..grid.count.pow(fam.n as u32) {
            let x: Vec<f64> = (0..fam.n).map(|j| xs[(idx / grid.count.pow(j as u32)) % grid.count]).collect();
            pts.push(graph_map(&d, &x));
        }
    }
    Ok(pts)
}

fn extend(ctx: &Ctx, fam: &Family, grid: &GridArgs, t_span: Option<f64>) -> Outcome<()> {
    let kappa = fam.kappa();
    let d = fam.at(0.0).map_err(lift)?;
    let js = joyce_map(&d, kappa, fam.theta).map_err(lift)?;
    let root = kappa.sqrt();
    let boundary = match fam.domain() {
        Domain::Interval { lo, hi } => Some((root * lo, root * hi)),
        Domain::Entire => None,
    };
    let reach = root * grid.s_max.abs().max(grid.s_min.abs());
    let span = t_span.unwrap_or_else(|| match boundary {
        Some((a, b)) => 2.0 * [a, b].iter().filter(|v| v.is_finite()).fold(0.0_f64, |m, v| m.max(v.abs())),
        None => reach,
    });
    if !(span > 0.0) {
        return Err(fail(EXIT_PARSE, "t-span must be positive"));
    }
    // One curve over the whole span, started from the far end of a backward run.
    let back = joyce_integrate(&js, -span, &ctx.opts).map_err(lift)?;
    let start = back.nodes.last().expect("nonempty").clone();
    let curve = joyce_integrate(&start, span, &ctx.opts).map_err(lift)?;
    let phase = quadric_phase(fam.n, fam.theta);
    let zs = s_samples(-grid.x_half, grid.x_half, grid.count);
    let ts = s_samples(-span, span, grid.count);
    let mut pts = Vec::new();
    let mut defect = 0.0_f64;
    for &t in &ts {
        let state = curve.at(t).map_err(lift)?;
        for idx in 0..grid.count.pow(fam.n as u32) {
            let z: Vec<f64> = (0..fam.n).map(|j| zs[(idx / grid.count.pow(j as u32)) % grid.count]).collect();
            pts.push(varquad::slag::quadric_point(&state, &z));
        }
        // Finite differences need room inside the integrated range.
        let h = 1e-3;
        if t.abs() + 2.0 * h <= span {
            let z: Vec<f64> = (0..fam.n).map(|j| zs[(j + 1) * grid.count / (fam.n + 1)]).collect();
            defect = defect.max(curve.phase_defect(phase, t, &z, h).map_err(lift)?.abs());
        }
    }
    ctx.write("extend_pointcloud.csv", &point_cloud_csv(&pts))?;
    let report = json!({
        "t_range": [-span, span],
        "graphical_t_range": boundary,
        "quadric_phase": phase,
        "max_phase_defect": defect,
        "points": pts.len(),
        "family": family_info(fam),
    });
    ctx.write_json("extend_report.json", &report)?;
    println!("extend: t in [{}, {}], {} points, max phase defect {defect:e}", -span, span, pts.len());
    let tol = 1e-7_f64.max(grid.tol);
    if !(defect <= tol) {
        return Err(fail(EXIT_TOLERANCE, format!("phase defect {defect:e} exceeds {tol:e}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    if !(cli.rtol > 0.0 && cli.atol > 0.0) {
        return Err(fail(EXIT_PARSE, "tolerances must be positive"));
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| fail(EXIT_PARSE, format!("--threads: {e}")))?;
    }
    let ctx = Ctx { seed: cli.seed, opts: Options { rtol: cli.rtol, atol: cli.atol, ..Options::default() }, out: cli.out };
    match &cli.command {
        Command::Classify { equation } => classify(&ctx, equation),
        Command::Solve { equation, init, s_min, s_max } => solve(&ctx, equation, init, *s_min, *s_max),
        Command::Family { family: f, grid } => family(&ctx, f, grid),
        Command::Verify { equation, family: f, init, grid } => {
            verify(&ctx, equation, f.as_deref(), init.as_deref(), grid)
        }
        Command::Slag { mode, family: f, grid, t_span } => slag(&ctx, *mode, f, grid, *t_span),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
