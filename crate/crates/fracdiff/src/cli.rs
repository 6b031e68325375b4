//! Command-line front end: six subcommands over the library's main
//! surfaces, producing CSV and JSON artifacts meant for diffing and
//! regression pinning.
//!
//! Conventions shared by every subcommand:
//!
//! - `--config FILE` supplies `key = value` defaults (keys mirror the long
//!   flags); explicit flags win.
//! - Numeric parameters are checked against the owning module's
//!   preconditions before anything is computed.
//! - CSV cells carry 17 significant digits; JSON numbers are written in
//!   exact round-trip form. Same config and seed, same bytes.
//! - Every output file `X` is written atomically and gets a sidecar
//!   `X.meta.json` holding the fully resolved parameters that produced it.
//! - Exit codes: 0 done, 2 rejected input, 3 a configured acceptance band
//!   was missed, 4 the numerics gave out. A band miss is a statement about
//!   the band, not about the program: the artifacts are still written.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coefficients::{lambda_coeffs, FracOrder};
use crate::continuous::{
    compare_discrete_continuous, derivative_variant_check, effective_beta, gl_vs_marchaud,
    registry, ConvergenceReport,
};
use crate::fractional_ops::{frac_left, frac_right, solve_dirichlet, DirichletProblem};
use crate::grid::{Grid, GridFunction, TailFn, TailModel};
use crate::harmonic::{
    cz_kernel_size_check, empirical_lp_growth, InputFamily, MaximalOp, TGrid, T_RANGE,
};
use crate::semigroups::extension::{extension_sample, neumann_limit};
use crate::{sidecar_path, write_atomic, FracError, Side};

/// How a run ends, separated so `run` can pick the exit code.
#[derive(Debug)]
enum Failure {
    /// Bad flags, config file, or parameters.
    Usage(String),
    /// A configured acceptance band was missed.
    Band(String),
    /// Validation passed but the computation broke down.
    Numerics(FracError),
}

type CliResult<T> = std::result::Result<T, Failure>;

impl From<FracError> for Failure {
    fn from(e: FracError) -> Self {
        // I/O problems are environment, not numerics
        if e.is_validation() || matches!(e, FracError::Io(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerics(e)
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Band(m)) => {
            eprintln!("band missed: {m}");
            3
        }
        Err(Failure::Numerics(e)) => {
            eprintln!("numerical failure: {e}");
            4
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Coeffs(a) => cmd_coeffs(a, &cfg),
        Cmd::Apply(a) => cmd_apply(a, &cfg),
        Cmd::Dirichlet(a) => cmd_dirichlet(a, &cfg),
        Cmd::Converge(a) => cmd_converge(a, &cfg),
        Cmd::Extension(a) => cmd_extension(a, &cfg),
        Cmd::Harmonic(a) => cmd_harmonic(a, &cfg),
    }
}

#[derive(Parser)]
#[command(
    name = "fracdiff",
    version,
    about = "One-sided fractional differences on uniform grids: kernels, boundary problems, \
             order sweeps, half-space extensions, and maximal-function diagnostics"
)]
struct Cli {
    /// Plain-text `key = value` defaults; explicit flags override.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kernel coefficients of order alpha, indices 0..=M, as CSV.
    Coeffs(CoeffsArgs),
    /// Apply the one-sided difference of order alpha to a registered function.
    Apply(ApplyArgs),
    /// Solve the boundary problem on the geometric eigenfixture and report residuals.
    Dirichlet(DirichletArgs),
    /// Measure the discrete-to-continuous convergence order over an h sweep.
    Converge(ConvergeArgs),
    /// Sample the half-space extension and its weighted Neumann limit.
    Extension(ExtensionArgs),
    /// Maximal-function norm growth and kernel size/smoothness decay.
    Harmonic(HarmonicArgs),
}

// ---------------------------------------------------------------------------
// config file and parameter resolution

/// `key = value` per line, `#` starts a comment. Keys mirror the long flags
/// of the subcommand being run; entries for other subcommands are ignored.
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    usage(format!("config line {}: expected key = value, got {raw:?}", i + 1))
                })?;
                map.insert(k.trim().to_owned(), v.trim().to_owned());
            }
        }
        Ok(FileConfig(map))
    }

    /// Flag wins; otherwise parse the file entry under `key`.
    fn or<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match (flag, self.0.get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, None) => Ok(None),
            (None, Some(raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config {key}: cannot parse {raw:?}"))),
        }
    }

    fn or_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match (flag, self.0.get(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, None) => Ok(None),
            (None, Some(raw)) => T::from_str(raw, false)
                .map(Some)
                .map_err(|e| usage(format!("config {key}: {e}"))),
        }
    }
}

fn require<T>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("missing parameter --{key} (flag or config file)")))
}

// ---------------------------------------------------------------------------
// shared parsing and output plumbing

/// 17 significant digits: enough to reproduce the f64 bit pattern.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<T> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("cannot parse {what} from {s:?}")))
}

fn split_pair<'a>(s: &'a str, what: &str) -> CliResult<(&'a str, &'a str)> {
    s.split_once(':')
        .ok_or_else(|| usage(format!("{what}: expected first:last, got {s:?}")))
}

/// `first:last` with first > last > 0: the halving ladder first, first/2, ...
/// down to last (inclusive up to rounding).
fn h_ladder(s: &str) -> CliResult<Vec<f64>> {
    let (a, b) = split_pair(s, "h sweep")?;
    let first: f64 = parse_num(a, "h")?;
    let last: f64 = parse_num(b, "h")?;
    if !(first.is_finite() && last > 0.0 && first > last) {
        return Err(usage(format!("h sweep {s:?}: need first > last > 0")));
    }
    let mut out = Vec::new();
    let mut h = first;
    while h > last * (1.0 - 1e-9) {
        out.push(h);
        h *= 0.5;
    }
    Ok(out)
}

/// `first:last` doubling ladder of window sizes, both powers of two.
fn size_ladder(s: &str) -> CliResult<Vec<usize>> {
    let (a, b) = split_pair(s, "sizes")?;
    let first: usize = parse_num(a, "size")?;
    let last: usize = parse_num(b, "size")?;
    if !(first.is_power_of_two() && last.is_power_of_two() && 2 <= first && first <= last) {
        return Err(usage(format!("sizes {s:?}: need powers of two with 2 <= first <= last")));
    }
    Ok(std::iter::successors(Some(first), |n| Some(n * 2))
        .take_while(|&n| n <= last)
        .collect())
}

fn f64_pair(s: &str, what: &str) -> CliResult<(f64, f64)> {
    let (a, b) = split_pair(s, what)?;
    let lo: f64 = parse_num(a, what)?;
    let hi: f64 = parse_num(b, what)?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(usage(format!("{what} {s:?}: need lo < hi")));
    }
    Ok((lo, hi))
}

fn i64_pair(s: &str, what: &str) -> CliResult<(i64, i64)> {
    let (a, b) = split_pair(s, what)?;
    Ok((parse_num(a, what)?, parse_num(b, what)?))
}

fn usize_pair(s: &str, what: &str) -> CliResult<(usize, usize)> {
    let (a, b) = split_pair(s, what)?;
    Ok((parse_num(a, what)?, parse_num(b, what)?))
}

/// Comma-separated heights, each positive and finite.
fn z_list(s: &str) -> CliResult<Vec<f64>> {
    let zs: Vec<f64> = s
        .split(',')
        .map(|t| parse_num(t, "z"))
        .collect::<CliResult<_>>()?;
    if zs.is_empty() || zs.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
        return Err(usage(format!("z list {s:?}: need positive finite heights")));
    }
    Ok(zs)
}

/// Lattice window for an x-window at step h. The grid constructor rejects
/// an empty result.
fn window_to_grid(h: f64, window: (f64, f64)) -> CliResult<Grid> {
    if !(h.is_finite() && h > 0.0) {
        return Err(usage(format!("step {h} must be positive and finite")));
    }
    let n_lo = (window.0 / h).ceil() as i64;
    let n_hi = (window.1 / h).floor() as i64;
    Ok(Grid::new(h, n_lo, n_hi)?)
}

/// The artifact plus `X.meta.json` carrying the resolved parameters.
fn write_output<P: Serialize>(path: &Path, bytes: &[u8], command: &str, params: &P) -> CliResult<()> {
    write_atomic(path, bytes).map_err(|e| usage(format!("write {}: {e}", path.display())))?;
    let meta = serde_json::json!({ "command": command, "params": params });
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    let side = sidecar_path(path);
    write_atomic(&side, text.as_bytes())
        .map_err(|e| usage(format!("write {}: {e}", side.display())))?;
    Ok(())
}

fn write_json<R: Serialize, P: Serialize>(
    path: &Path,
    report: &R,
    command: &str,
    params: &P,
) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    write_output(path, text.as_bytes(), command, params)
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Right => Side::Right,
            SideArg::Left => Side::Left,
        }
    }
}

// ---------------------------------------------------------------------------
// coeffs

#[derive(Args)]
struct CoeffsArgs {
    /// Order alpha in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Last kernel index; the CSV has rows 0..=M.
    #[arg(long = "M", value_name = "M")]
    m: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CoeffsParams {
    alpha: f64,
    m: usize,
    out: PathBuf,
}

fn cmd_coeffs(a: CoeffsArgs, cfg: &FileConfig) -> CliResult<()> {
    let alpha = require(cfg.or(a.alpha, "alpha")?, "alpha")?;
    let m = require(cfg.or(a.m, "M")?, "M")?;
    let out = cfg.or(a.out, "out")?.unwrap_or_else(|| PathBuf::from("coeffs.csv"));

    let table = lambda_coeffs(FracOrder::new(alpha)?, m)?;
    let mut csv = String::from("m,lambda\n");
    for (i, &lam) in table.values().iter().enumerate() {
        csv.push_str(&format!("{i},{}\n", fmt(lam)));
    }
    let params = CoeffsParams { alpha, m, out: out.clone() };
    write_output(&out, csv.as_bytes(), "coeffs", &params)?;
    println!("wrote {} ({} rows)", out.display(), m + 1);
    Ok(())
}

// ---------------------------------------------------------------------------
// apply

#[derive(Args)]
struct ApplyArgs {
    /// Registered function id (see the registry for the list).
    #[arg(long)]
    f: Option<String>,
    /// Order alpha in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Grid step.
    #[arg(long)]
    h: Option<f64>,
    /// Evaluation window in x units, lo:hi.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Kernel truncation length.
    #[arg(long = "M", value_name = "M")]
    m: Option<usize>,
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ApplyParams {
    f: String,
    alpha: f64,
    h: f64,
    window: (f64, f64),
    m: usize,
    side: String,
    out: PathBuf,
}

fn cmd_apply(a: ApplyArgs, cfg: &FileConfig) -> CliResult<()> {
    let fid = require(cfg.or(a.f, "f")?, "f")?;
    let alpha = require(cfg.or(a.alpha, "alpha")?, "alpha")?;
    let h = cfg.or(a.h, "h")?.unwrap_or(1.0);
    let window = f64_pair(&cfg.or(a.window, "window")?.unwrap_or_else(|| "-8:8".into()), "window")?;
    let m = cfg.or(a.m, "M")?.unwrap_or(10_000);
    let side: Side = cfg.or_enum(a.side, "side")?.unwrap_or(SideArg::Right).into();
    let out = cfg.or(a.out, "out")?.unwrap_or_else(|| PathBuf::from("apply.csv"));

    let f = registry::lookup(&fid)?;
    let table = lambda_coeffs(FracOrder::new(alpha)?, m)?;
    let grid = window_to_grid(h, window)?;
    // concrete values over the kernel's reach, so the sweep below never
    // re-evaluates a tail callback
    let u = match side {
        Side::Right => registry::restrict(f, grid).materialize(0, m)?,
        Side::Left => registry::restrict(f, grid).materialize(m, 0)?,
    };

    let mut csv = String::from("n,x,value,bound\n");
    for n in grid.indices() {
        let r = match side {
            Side::Right => frac_right(&u, &table, n)?,
            Side::Left => frac_left(&u, &table, n)?,
        };
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            fmt(grid.x(n)),
            fmt(r.value),
            fmt(r.truncation_bound)
        ));
    }
    let params = ApplyParams {
        f: fid,
        alpha,
        h,
        window,
        m,
        side: match side {
            Side::Right => "right".into(),
            Side::Left => "left".into(),
        },
        out: out.clone(),
    };
    write_output(&out, csv.as_bytes(), "apply", &params)?;
    println!(
        "wrote {} ({} rows)",
        out.display(),
        grid.n_hi() - grid.n_lo() + 1
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// dirichlet

#[derive(Args)]
struct DirichletArgs {
    /// Order alpha in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Geometric ratio of the eigenfixture, in (0, 1).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j0: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    j1: Option<i64>,
    /// Kernel truncation length.
    #[arg(long = "M", value_name = "M")]
    m: Option<usize>,
    /// Acceptance band on the max equation residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DirichletParams {
    alpha: f64,
    r: f64,
    j0: i64,
    j1: i64,
    m: usize,
    tol: f64,
    out: PathBuf,
}

fn cmd_dirichlet(a: DirichletArgs, cfg: &FileConfig) -> CliResult<()> {
    let alpha = cfg.or(a.alpha, "alpha")?.unwrap_or(0.5);
    let r = cfg.or(a.r, "r")?.unwrap_or(0.6);
    let j0 = cfg.or(a.j0, "j0")?.unwrap_or(-5);
    let j1 = cfg.or(a.j1, "j1")?.unwrap_or(35);
    let m = cfg.or(a.m, "M")?.unwrap_or(4_000);
    let tol = cfg.or(a.tol, "tol")?.unwrap_or(1e-10);
    let out = cfg.or(a.out, "out")?.unwrap_or_else(|| PathBuf::from("dirichlet.csv"));

    let order = FracOrder::new(alpha)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(usage(format!("ratio r = {r} must lie in (0, 1)")));
    }
    if j1 <= j0 {
        return Err(usage(format!("need j0 < j1, got {j0}:{j1}")));
    }
    if !(tol > 0.0) {
        return Err(usage(format!("tol = {tol} must be positive")));
    }

    // u(j) = r^j solves the problem with f(j) = r^j (1-r)^alpha at h = 1;
    // only [j1, oo) of g is ever read, so its left model is never consulted
    let g = GridFunction::sample(
        Grid::new(1.0, j1, j1 + 2)?,
        |x| r.powf(x),
        TailModel::Callback(TailFn::new(
            None,
            Some(r.powf(j1 as f64)),
            false,
            Arc::new(move |x: f64| r.powf(x)),
        )),
        TailModel::Callback(TailFn::new(
            None,
            Some(r.powf((j1 + 3) as f64)),
            true,
            Arc::new(move |x: f64| r.powf(x)),
        )),
    );
    let f: Vec<f64> = (j0..j1)
        .map(|j| r.powf(j as f64) * (1.0 - r).powf(alpha))
        .collect();
    let p = DirichletProblem {
        grid: Grid::new(1.0, j0, j1)?,
        j0,
        j1,
        f,
        g,
        order,
    };
    let sol = solve_dirichlet(&p, &lambda_coeffs(order, m)?)?;

    let mut csv = String::from("j,u,exact,residual\n");
    let mut max_res = 0.0f64;
    for (k, j) in (j0..j1).enumerate() {
        max_res = max_res.max(sol.residuals[k].abs());
        csv.push_str(&format!(
            "{j},{},{},{}\n",
            fmt(sol.u.values()[k]),
            fmt(r.powf(j as f64)),
            fmt(sol.residuals[k])
        ));
    }
    let params = DirichletParams { alpha, r, j0, j1, m, tol, out: out.clone() };
    write_output(&out, csv.as_bytes(), "dirichlet", &params)?;
    println!(
        "wrote {}; max residual {}, truncation slack {}",
        out.display(),
        fmt(max_res),
        fmt(sol.slack)
    );
    if max_res > tol {
        return Err(Failure::Band(format!(
            "max residual {} exceeds tol {}",
            fmt(max_res),
            fmt(tol)
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// converge

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Pointwise error at --x against the singular-integral reference.
    Point,
    /// Sup error over --window per step.
    Window,
    /// The differentiated variant against the derivative's reference.
    Variant,
}

impl ModeArg {
    fn id(self) -> &'static str {
        match self {
            ModeArg::Point => "point",
            ModeArg::Window => "window",
            ModeArg::Variant => "variant",
        }
    }
}

#[derive(Args)]
struct ConvergeArgs {
    /// Registered function id.
    #[arg(long)]
    f: Option<String>,
    /// Order alpha in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Step sweep first:last, halving (needs at least 4 steps).
    #[arg(long)]
    h: Option<String>,
    /// Evaluation point for point mode.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Window lo:hi for window mode.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Acceptance band lo:hi on the fitted slope; no band, no check.
    #[arg(long)]
    band: Option<String>,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct ConvergeParams {
    f: String,
    alpha: f64,
    mode: String,
    h_list: Vec<f64>,
    x: Option<f64>,
    window: Option<(f64, f64)>,
    band: Option<(f64, f64)>,
    json: PathBuf,
    csv: PathBuf,
}

/// What the sweep produced. A sweep whose errors are identically zero
/// (constants, exact cases) is a legitimate degenerate outcome, not a
/// failure.
#[derive(Serialize)]
struct ConvergeDoc {
    degenerate: bool,
    degenerate_reason: Option<String>,
    in_band: Option<bool>,
    report: Option<ConvergenceReport>,
}

fn sweep_or_degenerate(
    r: crate::Result<ConvergenceReport>,
) -> CliResult<(Option<ConvergenceReport>, Option<String>)> {
    match r {
        Ok(rep) => Ok((Some(rep), None)),
        Err(FracError::DegenerateFit(msg)) => Ok((None, Some(msg))),
        Err(e) => Err(e.into()),
    }
}

fn cmd_converge(a: ConvergeArgs, cfg: &FileConfig) -> CliResult<()> {
    let fid = require(cfg.or(a.f, "f")?, "f")?;
    let alpha = require(cfg.or(a.alpha, "alpha")?, "alpha")?;
    let h_spec = cfg.or(a.h, "h")?.unwrap_or_else(|| "0.2:0.0125".into());
    let x = cfg.or(a.x, "x")?.unwrap_or(0.0);
    let mode = cfg.or_enum(a.mode, "mode")?.unwrap_or(ModeArg::Point);
    let window_spec = cfg.or(a.window, "window")?.unwrap_or_else(|| "-2:2".into());
    let band = match cfg.or(a.band, "band")? {
        Some(s) => Some(f64_pair(&s, "band")?),
        None => None,
    };
    let json = cfg.or(a.json, "json")?.unwrap_or_else(|| PathBuf::from("converge.json"));
    let csv = cfg.or(a.csv, "csv")?.unwrap_or_else(|| PathBuf::from("converge.csv"));

    let f = registry::lookup(&fid)?;
    let order = FracOrder::new(alpha)?;
    let h_list = h_ladder(&h_spec)?;
    if h_list.len() < 4 {
        return Err(usage(format!(
            "h sweep {h_spec:?} gives {} steps; the order fit needs at least 4",
            h_list.len()
        )));
    }
    if !x.is_finite() {
        return Err(usage(format!("x = {x} must be finite")));
    }
    let window = f64_pair(&window_spec, "window")?;

    let (report, reason) = match mode {
        ModeArg::Point => sweep_or_degenerate(gl_vs_marchaud(f, x, order, &h_list)),
        ModeArg::Variant => sweep_or_degenerate(derivative_variant_check(f, order, &h_list)),
        ModeArg::Window => sweep_or_degenerate(
            h_list
                .iter()
                .map(|&h| compare_discrete_continuous(f, order, h, window))
                .collect::<crate::Result<Vec<f64>>>()
                .and_then(|errs| {
                    ConvergenceReport::new(order.value(), effective_beta(f), h_list.clone(), errs)
                }),
        ),
    }?;

    let in_band = match (&report, band) {
        (Some(rep), Some((lo, hi))) => Some(lo <= rep.slope && rep.slope <= hi),
        _ => None,
    };
    let params = ConvergeParams {
        f: fid,
        alpha,
        mode: mode.id().into(),
        h_list: h_list.clone(),
        x: matches!(mode, ModeArg::Point).then_some(x),
        window: matches!(mode, ModeArg::Window).then_some(window),
        band,
        json: json.clone(),
        csv: csv.clone(),
    };

    let mut rows = String::from("h,err\n");
    if let Some(rep) = &report {
        for (h, e) in rep.h_list.iter().zip(&rep.err_list) {
            rows.push_str(&format!("{},{}\n", fmt(*h), fmt(*e)));
        }
    }
    write_output(&csv, rows.as_bytes(), "converge", &params)?;

    let doc = ConvergeDoc {
        degenerate: report.is_none(),
        degenerate_reason: reason,
        in_band,
        report,
    };
    write_json(&json, &doc, "converge", &params)?;

    match &doc.report {
        None => println!(
            "degenerate sweep ({}); wrote {} and {}",
            doc.degenerate_reason.as_deref().unwrap_or(""),
            json.display(),
            csv.display()
        ),
        Some(rep) => println!(
            "slope {} (r2 {}); wrote {} and {}",
            fmt(rep.slope),
            fmt(rep.r2),
            json.display(),
            csv.display()
        ),
    }
    if in_band == Some(false) {
        let rep = doc.report.as_ref().expect("band checked implies report");
        let (lo, hi) = band.expect("band checked implies band");
        return Err(Failure::Band(format!(
            "slope {} outside [{}, {}]",
            fmt(rep.slope),
            fmt(lo),
            fmt(hi)
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// extension

#[derive(Args)]
struct ExtensionArgs {
    /// Order gamma in (0, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Boundary data: indicator, geometric, or a registry id (step 1).
    #[arg(long)]
    f: Option<String>,
    /// Ratio for geometric data.
    #[arg(long)]
    r: Option<f64>,
    /// Indicator support is [0, width).
    #[arg(long)]
    width: Option<i64>,
    /// Lattice window lo:hi for the data.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Comma-separated heights for the profile CSV.
    #[arg(long)]
    z: Option<String>,
    /// Starting height of the halving ladder in the Neumann limit.
    #[arg(long)]
    z0: Option<f64>,
    /// Evaluation tolerance for the extension samples.
    #[arg(long)]
    tol: Option<f64>,
    /// Acceptance band on the worst Neumann relative error.
    #[arg(long)]
    band: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Serialize)]
struct ExtensionParams {
    gamma: f64,
    f: String,
    r: Option<f64>,
    width: Option<i64>,
    window: (i64, i64),
    z: Vec<f64>,
    z0: f64,
    tol: f64,
    band: f64,
    out: PathBuf,
    json: PathBuf,
}

#[derive(Serialize)]
struct NeumannDoc {
    gamma: f64,
    f: String,
    z0: f64,
    max_rel_err: f64,
    comparisons: Vec<crate::semigroups::extension::NeumannComparison>,
}

fn boundary_data(id: &str, r: f64, width: i64, window: (i64, i64)) -> CliResult<GridFunction> {
    let grid = Grid::new(1.0, window.0, window.1)?;
    match id {
        "indicator" => {
            if width < 1 {
                return Err(usage(format!("width = {width} must be at least 1")));
            }
            if window.0 > 0 || window.1 < width - 1 {
                return Err(usage(format!(
                    "window {}:{} must contain the support [0, {width})",
                    window.0, window.1
                )));
            }
            let w = width as f64;
            Ok(GridFunction::sample(
                grid,
                move |x| if (0.0..w).contains(&x) { 1.0 } else { 0.0 },
                TailModel::Zero,
                TailModel::Zero,
            ))
        }
        "geometric" => {
            if !(r > 0.0 && r < 1.0) {
                return Err(usage(format!("ratio r = {r} must lie in (0, 1)")));
            }
            // r^x for x >= 0, frozen at 1 to the left: both rays bounded
            Ok(GridFunction::sample(
                grid,
                move |x| r.powf(x.max(0.0)),
                TailModel::Constant(1.0),
                TailModel::Callback(TailFn::new(
                    None,
                    Some(r.powf((window.1 + 1) as f64)),
                    true,
                    Arc::new(move |x: f64| r.powf(x)),
                )),
            ))
        }
        other => {
            let f = registry::lookup(other)?;
            Ok(registry::restrict(f, grid))
        }
    }
}

fn cmd_extension(a: ExtensionArgs, cfg: &FileConfig) -> CliResult<()> {
    let gamma = require(cfg.or(a.gamma, "gamma")?, "gamma")?;
    let fid = cfg.or(a.f, "f")?.unwrap_or_else(|| "indicator".into());
    let r = cfg.or(a.r, "r")?.unwrap_or(0.6);
    let width = cfg.or(a.width, "width")?.unwrap_or(1);
    let window = i64_pair(&cfg.or(a.window, "window")?.unwrap_or_else(|| "-16:48".into()), "window")?;
    let zs = z_list(&cfg.or(a.z, "z")?.unwrap_or_else(|| "0.5,1,2".into()))?;
    // deep enough that the halving ladder's own stop rule is tighter than
    // the default band
    let z0 = cfg.or(a.z0, "z0")?.unwrap_or(0.25);
    let tol = cfg.or(a.tol, "tol")?.unwrap_or(1e-8);
    let band = cfg.or(a.band, "band")?.unwrap_or(1e-3);
    let out = cfg.or(a.out, "out")?.unwrap_or_else(|| PathBuf::from("extension.csv"));
    let json = cfg.or(a.json, "json")?.unwrap_or_else(|| PathBuf::from("neumann.json"));

    let order = FracOrder::new(gamma)?;
    if !(band > 0.0) {
        return Err(usage(format!("band = {band} must be positive")));
    }
    let u = boundary_data(&fid, r, width, window)?;

    let params = ExtensionParams {
        gamma,
        f: fid.clone(),
        r: (fid == "geometric").then_some(r),
        width: (fid == "indicator").then_some(width),
        window,
        z: zs.clone(),
        z0,
        tol,
        band,
        out: out.clone(),
        json: json.clone(),
    };

    let mut csv = String::from("z,n,U\n");
    for &z in &zs {
        let s = extension_sample(&u, order, z, tol)?;
        for n in s.values().grid().indices() {
            csv.push_str(&format!("{},{n},{}\n", fmt(z), fmt(s.values().value(n))));
        }
    }
    write_output(&out, csv.as_bytes(), "extension", &params)?;

    let comparisons = neumann_limit(&u, order, z0)?;
    let max_rel_err = comparisons.iter().fold(0.0f64, |m, c| m.max(c.rel_err));
    let doc = NeumannDoc {
        gamma,
        f: fid,
        z0,
        max_rel_err,
        comparisons,
    };
    write_json(&json, &doc, "extension", &params)?;

    println!(
        "wrote {} and {}; max neumann rel err {}",
        out.display(),
        json.display(),
        fmt(max_rel_err)
    );
    if max_rel_err > band {
        return Err(Failure::Band(format!(
            "neumann rel err {} exceeds {}",
            fmt(max_rel_err),
            fmt(band)
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// harmonic

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    #[value(name = "heat_max")]
    HeatMax,
    #[value(name = "poisson_max")]
    PoissonMax,
    #[value(name = "poisson_g")]
    PoissonG,
    /// Kernel size and smoothness decay probes.
    Cz,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Indicator,
    #[value(name = "lacunary_comb")]
    LacunaryComb,
    #[value(name = "random_signs")]
    RandomSigns,
}

impl From<FamilyArg> for InputFamily {
    fn from(f: FamilyArg) -> InputFamily {
        match f {
            FamilyArg::Indicator => InputFamily::Indicator,
            FamilyArg::LacunaryComb => InputFamily::LacunaryComb,
            FamilyArg::RandomSigns => InputFamily::RandomSigns,
        }
    }
}

#[derive(Args)]
struct HarmonicArgs {
    #[arg(long, value_enum)]
    op: Option<OpArg>,
    /// Order gamma in (0, 1); required for the poisson ops and cz.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Norm exponent (1 <= p, or inf).
    #[arg(long)]
    p: Option<f64>,
    /// Window-size ladder first:last, doubling, powers of two.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Kernel probe range lo:hi for cz.
    #[arg(long)]
    j: Option<String>,
    /// Time-grid resolution for cz.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct GrowthParams {
    op: String,
    gamma: Option<f64>,
    family: String,
    p: f64,
    sizes: Vec<usize>,
    trials: usize,
    seed: u64,
    json: PathBuf,
}

#[derive(Serialize)]
struct CzParams {
    op: String,
    gamma: f64,
    j: (usize, usize),
    k: usize,
    t_range: (f64, f64),
    csv: PathBuf,
    json: PathBuf,
}

fn cmd_harmonic(a: HarmonicArgs, cfg: &FileConfig) -> CliResult<()> {
    let op = require(cfg.or_enum(a.op, "op")?, "op")?;
    let gamma = cfg.or(a.gamma, "gamma")?;
    let json = cfg.or(a.json, "json")?.unwrap_or_else(|| PathBuf::from("harmonic.json"));

    let need_gamma = || -> CliResult<FracOrder> {
        Ok(FracOrder::new(require(gamma, "gamma")?)?)
    };

    if let OpArg::Cz = op {
        let g = need_gamma()?;
        let (j_lo, j_hi) = usize_pair(&cfg.or(a.j, "j")?.unwrap_or_else(|| "8:1024".into()), "j")?;
        let k = cfg.or(a.k, "k")?.unwrap_or(96);
        let csv = cfg.or(a.csv, "csv")?.unwrap_or_else(|| PathBuf::from("cz.csv"));
        let tgrid = TGrid::log_spaced(T_RANGE.0, T_RANGE.1, k)?;
        let rep = cz_kernel_size_check(g, &tgrid, j_lo, j_hi)?;

        let params = CzParams {
            op: "cz".into(),
            gamma: g.value(),
            j: (j_lo, j_hi),
            k,
            t_range: T_RANGE,
            csv: csv.clone(),
            json: json.clone(),
        };
        let mut rows = String::from("j,s,d\n");
        for i in 0..rep.j.len() {
            rows.push_str(&format!("{},{},{}\n", rep.j[i], fmt(rep.s[i]), fmt(rep.d[i])));
        }
        write_output(&csv, rows.as_bytes(), "harmonic", &params)?;
        write_json(&json, &rep, "harmonic", &params)?;
        println!(
            "wrote {} and {}; size exponent {}, smoothness exponent {}",
            csv.display(),
            json.display(),
            fmt(rep.s_exponent),
            fmt(rep.d_exponent)
        );
        return Ok(());
    }

    let max_op = match op {
        OpArg::HeatMax => MaximalOp::HeatMax,
        OpArg::PoissonMax => MaximalOp::PoissonMax(need_gamma()?),
        OpArg::PoissonG => MaximalOp::PoissonG(need_gamma()?),
        OpArg::Cz => unreachable!("handled above"),
    };
    let family = cfg.or_enum(a.family, "family")?.unwrap_or(FamilyArg::Indicator);
    let p = cfg.or(a.p, "p")?.unwrap_or(2.0);
    let sizes = size_ladder(&cfg.or(a.sizes, "sizes")?.unwrap_or_else(|| "256:4096".into()))?;
    let trials = cfg.or(a.trials, "trials")?.unwrap_or(1);
    let seed = cfg.or(a.seed, "seed")?.unwrap_or(0);

    let rep = empirical_lp_growth(max_op, family.into(), p, &sizes, trials, seed)?;
    let params = GrowthParams {
        op: rep.op.clone(),
        gamma: rep.gamma,
        family: rep.family.clone(),
        p,
        sizes,
        trials,
        seed,
        json: json.clone(),
    };
    write_json(&json, &rep, "harmonic", &params)?;
    println!(
        "wrote {}; squared-norm slope {}, norm ratio {}",
        json.display(),
        fmt(rep.squared_norm_slope),
        fmt(rep.norm_ratio)
    );
    Ok(())
}
