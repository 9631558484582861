//! The `monoscat` command line.
//!
//! Exit status: 0 on success, 1 for rejected input (critical point, invalid potential or
//! argument), 2 for numerical failures and I/O errors, 64 for usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monoscat_core::actions::{self, GridSpec};
use monoscat_core::lattice::{transport_cell, LatticeCell, TransportReport, ZeroSet};
use monoscat_core::orbits::{self, ImpactSetup, LoopPath};
use monoscat_core::quantum::MeshSpec;
use monoscat_core::{Branch, Error, PotentialModel, QuadratureSpec, ScatterPoint, Side};
use serde::Serialize;

use crate::config;
use crate::drivers;
use crate::format::{write_json, write_record, write_records, Format, FormatError};

pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "monoscat", version, about = "Semiclassical phase shifts, deflection angles and scattering monodromy")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Lorentzian,
    Zero,
}

#[derive(Debug, Args)]
struct Common {
    /// Potential family.
    #[arg(long, global = true, value_enum, default_value = "lorentzian")]
    potential: Kind,
    /// Barrier height of the Lorentzian a/(1 + (b r)^2).
    #[arg(long = "a", global = true, default_value_t = 20.0)]
    a: f64,
    /// Inverse width of the Lorentzian.
    #[arg(long = "b", global = true, default_value_t = 1.0)]
    b: f64,
    /// Mass.
    #[arg(long, global = true, default_value_t = 1.0)]
    mu: f64,
    /// Planck's constant for phase shifts and lattices.
    #[arg(long, global = true, default_value_t = monoscat_core::DEFAULT_HBAR)]
    hbar: f64,
    /// Relative tolerance of every integral.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Absolute tolerance of every integral.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Radius splitting the turning-point region from the tail.
    #[arg(long, global = true)]
    r_cut: Option<f64>,
    /// Subdivision budget of the adaptive quadrature.
    #[arg(long, global = true)]
    max_subdivisions: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// No progress messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// key = value file with defaults for any long flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

/// A point of the (l, p) plane; the momentum may be given through the energy.
#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    #[arg(long, required_unless_present = "e", conflicts_with = "e")]
    p: Option<f64>,
    /// Energy, instead of --p.
    #[arg(long)]
    e: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Raw,
    Smoothed,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Raw => Branch::Raw,
            BranchArg::Smoothed => Branch::Smoothed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Shape {
    Rectangle,
    Diamond,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical data of the potential.
    Info,
    /// Radial action difference ΔW, or the (r, p_r) phase portrait with --portrait.
    Action {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value = "raw")]
        branch: BranchArg,
        /// Emit the phase portrait with this many radii instead of ΔW.
        #[arg(long)]
        portrait: Option<usize>,
        /// Outer radius of the portrait.
        #[arg(long, default_value_t = 8.0)]
        r_max: f64,
    },
    /// ∂ΔW/∂l, or its one-sided limit at l = 0 with --limit.
    Dwdl {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "limit")]
        l: Option<f64>,
        #[arg(long, required_unless_present = "e", conflicts_with = "e")]
        p: Option<f64>,
        #[arg(long)]
        e: Option<f64>,
        #[arg(long, value_enum, conflicts_with = "l")]
        limit: Option<SideArg>,
    },
    /// Smoothed action difference ΔW̃.
    Smoothed {
        #[command(flatten)]
        point: PointArgs,
    },
    /// WKB phase shift ΔW / 2ħ at (l, p) or at lattice coordinates (m, k).
    Phase {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "m", conflicts_with = "m")]
        l: Option<f64>,
        #[arg(long, required_unless_present = "k", conflicts_with = "k")]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i32>,
        #[arg(long)]
        k: Option<f64>,
    },
    /// Classical time delay ∂ΔW/∂E.
    Timedelay {
        #[arg(long, allow_hyphen_values = true)]
        l: f64,
        #[arg(long)]
        e: f64,
    },
    /// ΔW or ΔW̃ on a rectangular (l, p) grid.
    Grid {
        #[arg(long, value_enum, default_value = "raw")]
        which: BranchArg,
        #[arg(long, allow_hyphen_values = true)]
        lmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        lmax: f64,
        #[arg(long)]
        pmin: f64,
        #[arg(long)]
        pmax: f64,
        #[arg(long)]
        nl: usize,
        #[arg(long)]
        np: usize,
    },
    /// Deflection angle from the radial integral.
    Deflect {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Trajectory of a particle coming in from y = −∞.
    Orbit {
        #[command(flatten)]
        point: PointArgs,
        /// Start and stop radius.
        #[arg(long)]
        r_far: Option<f64>,
        /// Keep every n-th sample.
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Deflection angle continued around a loop in the (l, p) plane.
    Loop {
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        lmin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        lmax: f64,
        #[arg(long, default_value_t = 4.0)]
        pmin: f64,
        #[arg(long, default_value_t = 9.0)]
        pmax: f64,
        /// Polygon `l,p;l,p;...` instead of the rectangle.
        #[arg(long, allow_hyphen_values = true)]
        waypoints: Option<String>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Traverse clockwise.
        #[arg(long)]
        reverse: bool,
    },
    /// Zeros of the phase shift mod π in the (m, k) plane.
    Lattice {
        #[arg(long, allow_hyphen_values = true, default_value_t = -7)]
        mmin: i32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 7)]
        mmax: i32,
        #[arg(long, default_value_t = 2.0)]
        kmin: f64,
        #[arg(long, default_value_t = 70.0)]
        kmax: f64,
        /// Add the raw label of each zero.
        #[arg(long)]
        labels: bool,
    },
    /// Parallel transport of a lattice cell around a loop in the (m, k) plane.
    Transport {
        /// Column of the start cell's anchor.
        #[arg(long, allow_hyphen_values = true, default_value_t = 3)]
        m: i32,
        /// Raw label of the start cell's anchor.
        #[arg(long, default_value_t = 8)]
        label: i64,
        /// Loop shape around (0, p_c/ħ), starting at the anchor.
        #[arg(long, value_enum, default_value = "rectangle")]
        shape: Shape,
        /// Polygon `m,k;m,k;...` instead of --shape.
        #[arg(long, allow_hyphen_values = true)]
        waypoints: Option<String>,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long)]
        reverse: bool,
        #[arg(long, allow_hyphen_values = true, default_value_t = -7)]
        mmin: i32,
        #[arg(long, allow_hyphen_values = true, default_value_t = 7)]
        mmax: i32,
        #[arg(long, default_value_t = 2.0)]
        kmin: f64,
        #[arg(long, default_value_t = 70.0)]
        kmax: f64,
    },
    /// WKB phase shifts against exact partial-wave phase shifts.
    Verify {
        /// Comma-separated m values.
        #[arg(long, allow_hyphen_values = true, default_value = "-6,-3,-1,1,3,6")]
        m_list: String,
        /// Comma-separated k values.
        #[arg(long, default_value = "8,14,20,30,40,50")]
        k_list: String,
        /// Numerov steps per wavelength on the coarsest mesh.
        #[arg(long, default_value_t = 40.0)]
        ppw: f64,
        /// Richardson levels.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Output(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Output(e.0)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            Failure::Core(_) => EXIT_DOMAIN,
            Failure::Output(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Output(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

struct Context {
    pot: PotentialModel,
    hbar: f64,
    quad: QuadratureSpec,
    format: Format,
    quiet: bool,
}

impl Context {
    fn from_common(c: &Common) -> Result<Self, Failure> {
        let pot = match c.potential {
            Kind::Lorentzian => PotentialModel::lorentzian(c.a, c.b, c.mu)?,
            Kind::Zero => PotentialModel::zero(c.mu)?,
        };
        if !(c.hbar > 0.0 && c.hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar must be positive, got {}", c.hbar)).into());
        }
        let mut quad = QuadratureSpec::default();
        if let Some(t) = c.rel_tol {
            quad.rel_tol = t;
        }
        if let Some(t) = c.abs_tol {
            quad.abs_tol = t;
        }
        if let Some(n) = c.max_subdivisions {
            quad.max_subdivisions = n;
        }
        quad.r_cut = c.r_cut;
        quad.validate()?;
        Ok(Context { pot, hbar: c.hbar, quad, format: c.format, quiet: c.quiet })
    }

    fn momentum(&self, p: Option<f64>, e: Option<f64>) -> Result<f64, Failure> {
        match (p, e) {
            (Some(p), None) => Ok(p),
            (None, Some(e)) if e > 0.0 => Ok((2.0 * self.pot.mu() * e).sqrt()),
            (None, Some(e)) => Err(Error::Domain(format!("energy must be positive, got {e}")).into()),
            _ => Err(Failure::Usage("give exactly one of --p and --e".into())),
        }
    }

    fn point(&self, l: f64, p: Option<f64>, e: Option<f64>) -> Result<ScatterPoint, Failure> {
        Ok(ScatterPoint::new(l, self.momentum(p, e)?)?)
    }

    fn progress(&self, err: &mut dyn Write, msg: &str) {
        if !self.quiet {
            let _ = writeln!(err, "{msg}");
        }
    }
}

/// Runs the program on `args` (including the program name) and returns the exit status.
pub fn run(args: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let args = match config::config_path(&args) {
        Some(path) => match config::load(path.as_ref()) {
            Ok(entries) => config::merge(args, &entries),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
        },
        None => args,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let mut buffer = Vec::new();
    let result = Context::from_common(&cli.common).and_then(|ctx| execute(&ctx, &cli.command, &mut buffer, stderr));
    let status = match result {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(stderr, "error: {f}");
            return f.code();
        }
    };
    let written = match &cli.common.out {
        Some(path) => fs::write(path, &buffer).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(&buffer).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_NUMERICAL;
    }
    status
}

#[derive(Serialize)]
struct InfoRecord {
    potential: &'static str,
    mu: f64,
    hbar: f64,
    e_c: f64,
    p_c: f64,
    alpha: f64,
    k_c: f64,
}

#[derive(Serialize)]
struct ValueRecord {
    l: f64,
    p: f64,
    value: f64,
    err_estimate: f64,
}

#[derive(Serialize)]
struct LimitRecord {
    p: f64,
    side: &'static str,
    value: f64,
    err_estimate: f64,
}

#[derive(Serialize)]
struct PortraitRecord {
    r: f64,
    pr_free: Option<f64>,
    pr: Option<f64>,
}

#[derive(Serialize)]
struct PhaseRecord {
    l: f64,
    p: f64,
    hbar: f64,
    delta: f64,
    reduced: f64,
    err_estimate: f64,
}

#[derive(Serialize)]
struct TimeDelayRecord {
    l: f64,
    e: f64,
    value: f64,
    err_estimate: f64,
}

#[derive(Serialize)]
struct DeflectRecord {
    l: f64,
    p: f64,
    deflection: f64,
    err_estimate: f64,
}

#[derive(Serialize, Clone, Copy)]
struct SampleRecord {
    t: f64,
    x: f64,
    y: f64,
    px: f64,
    py: f64,
}

#[derive(Serialize)]
struct OrbitDoc {
    l: f64,
    p: f64,
    e: f64,
    deflection: f64,
    escaped_forward: bool,
    energy_error: f64,
    angular_momentum_error: f64,
    samples: Vec<SampleRecord>,
}

#[derive(Serialize)]
struct PathDoc {
    waypoints: Vec<(f64, f64)>,
    closed: bool,
    samples_per_leg: usize,
}

#[derive(Serialize)]
struct CrossingDoc {
    leg: usize,
    p: f64,
    direction: i32,
    branch: &'static str,
}

#[derive(Serialize)]
struct LoopDoc {
    path: PathDoc,
    holonomy: f64,
    winding: i32,
    max_step: f64,
    crossings: Vec<CrossingDoc>,
}

#[derive(Serialize)]
struct LoopRecord {
    holonomy: f64,
    winding: i32,
    max_step: f64,
    crossings: usize,
}

#[derive(Serialize)]
struct ZeroRecord {
    m: i32,
    k: f64,
}

#[derive(Serialize)]
struct LabelledZeroRecord {
    m: i32,
    k: f64,
    label: i64,
}

#[derive(Serialize)]
struct VertexDoc {
    m: i32,
    k: f64,
    label: i64,
}

#[derive(Serialize)]
struct CellDoc {
    chart: &'static str,
    anchor: (i32, i64),
    u: (i32, i64),
    v: (i32, i64),
    vertices: Vec<VertexDoc>,
}

#[derive(Serialize)]
struct CellCrossingDoc {
    p_region: &'static str,
    branch_used: &'static str,
    k: f64,
    direction: i32,
}

#[derive(Serialize)]
struct TransportDoc {
    k_c: f64,
    path: PathDoc,
    start_cell: CellDoc,
    final_cell: CellDoc,
    matrix: [[i64; 2]; 2],
    winding: i32,
    moves: usize,
    worst_margin: f64,
    crossings: Vec<CellCrossingDoc>,
}

#[derive(Serialize)]
struct ComparisonRecord {
    m: i32,
    k: f64,
    delta_wkb: f64,
    delta_exact: f64,
    abs_err: f64,
    rel_err: f64,
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Raw => "raw",
        Branch::Smoothed => "smoothed",
    }
}

fn path_doc(path: &LoopPath) -> PathDoc {
    PathDoc { waypoints: path.waypoints.clone(), closed: path.closed, samples_per_leg: path.samples_per_leg }
}

fn cell_doc(cell: &LatticeCell) -> CellDoc {
    CellDoc {
        chart: branch_name(cell.chart),
        anchor: cell.anchor,
        u: cell.u,
        v: cell.v,
        vertices: cell.vertices.iter().map(|v| VertexDoc { m: v.m, k: v.k, label: v.label }).collect(),
    }
}

/// Parses `x,y;x,y;...`.
fn parse_waypoints(text: &str) -> Result<Vec<(f64, f64)>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let mut it = pair.split(',').map(|x| x.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok((x, y)),
                _ => Err(Failure::Usage(format!("bad waypoint `{pair}`; expected `x,y`"))),
            }
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|_| Failure::Usage(format!("bad {what} entry `{s}`"))))
        .collect()
}

/// Default transport loops around `(0, k_c)`, starting at the anchor of the start cell.
fn default_loop(shape: Shape, m: i32, anchor_k: f64, k_c: f64, samples: usize) -> LoopPath {
    let m = f64::from(m);
    let waypoints = match shape {
        Shape::Rectangle => vec![(m, anchor_k), (m, k_c + 9.0), (-m - 1.0, k_c + 9.0), (-m - 1.0, k_c - 4.0), (m, k_c - 4.0)],
        Shape::Diamond => vec![(m, anchor_k), (0.0, k_c + 12.0), (-m, k_c), (0.0, k_c - 4.5)],
    };
    LoopPath::new(waypoints, true, samples)
}

fn transport_doc(zeros: &ZeroSet, path: &LoopPath, report: &TransportReport) -> TransportDoc {
    TransportDoc {
        k_c: zeros.k_c,
        path: path_doc(path),
        start_cell: cell_doc(&report.start),
        final_cell: cell_doc(&report.end),
        matrix: report.matrix.0,
        winding: report.winding,
        moves: report.moves,
        worst_margin: report.worst_margin,
        crossings: report
            .crossings
            .iter()
            .map(|c| CellCrossingDoc {
                p_region: if c.below_singularity { "below" } else { "above" },
                branch_used: branch_name(c.branch_used),
                k: c.k,
                direction: c.direction,
            })
            .collect(),
    }
}

fn execute(ctx: &Context, command: &Command, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<i32, Failure> {
    let (pot, quad, format) = (&ctx.pot, &ctx.quad, ctx.format);
    match command {
        Command::Info => {
            let c = pot.critical_data()?;
            let name = match pot.kind() {
                monoscat_core::PotentialKind::Lorentzian { .. } => "lorentzian",
                monoscat_core::PotentialKind::Zero => "zero",
                monoscat_core::PotentialKind::Custom(_) => "custom",
            };
            let rec = InfoRecord { potential: name, mu: pot.mu(), hbar: ctx.hbar, e_c: c.e_c, p_c: c.p_c, alpha: c.alpha, k_c: c.p_c / ctx.hbar };
            write_record(out, format, &rec)?;
        }
        Command::Action { point, branch, portrait, r_max } => {
            let pt = ctx.point(point.l, point.p, point.e)?;
            match portrait {
                Some(n) => {
                    if *n < 2 || !(*r_max > 0.0) {
                        return Err(Failure::Usage("--portrait needs at least 2 radii and a positive --r-max".into()));
                    }
                    let two_mu = 2.0 * pot.mu();
                    let e = pt.energy(pot.mu());
                    let rows: Vec<PortraitRecord> = (1..=*n)
                        .map(|i| {
                            let r = r_max * i as f64 / *n as f64;
                            let free = two_mu * e - pt.l * pt.l / (r * r);
                            let full = free - two_mu * pot.value(r);
                            PortraitRecord { r, pr_free: (free >= 0.0).then(|| free.sqrt()), pr: (full >= 0.0).then(|| full.sqrt()) }
                        })
                        .collect();
                    write_records(out, format, &rows)?;
                }
                None => {
                    let v = actions::delta_w_on(pot, pt, (*branch).into(), quad)?;
                    write_record(out, format, &ValueRecord { l: pt.l, p: pt.p, value: v.value, err_estimate: v.err_estimate })?;
                }
            }
        }
        Command::Dwdl { l, p, e, limit } => {
            let p = ctx.momentum(*p, *e)?;
            match (l, limit) {
                (_, Some(side)) => {
                    let (s, name) = match side {
                        SideArg::Above => (Side::FromAbove, "above"),
                        SideArg::Below => (Side::FromBelow, "below"),
                    };
                    let v = actions::limit_dl(pot, p, s, quad)?;
                    write_record(out, format, &LimitRecord { p, side: name, value: v.value, err_estimate: v.err_estimate })?;
                }
                (Some(l), None) => {
                    let v = actions::d_delta_w_dl(pot, ScatterPoint::new(*l, p)?, quad)?;
                    write_record(out, format, &ValueRecord { l: *l, p, value: v.value, err_estimate: v.err_estimate })?;
                }
                (None, None) => return Err(Failure::Usage("give --l or --limit".into())),
            }
        }
        Command::Smoothed { point } => {
            let pt = ctx.point(point.l, point.p, point.e)?;
            let v = actions::delta_w_smoothed(pot, pt, quad)?;
            write_record(out, format, &ValueRecord { l: pt.l, p: pt.p, value: v.value, err_estimate: v.err_estimate })?;
        }
        Command::Phase { l, p, m, k } => {
            let l = l.or(m.map(|m| f64::from(m) * ctx.hbar)).ok_or_else(|| Failure::Usage("give --l or --m".into()))?;
            let p = p.or(k.map(|k| k * ctx.hbar)).ok_or_else(|| Failure::Usage("give --p or --k".into()))?;
            let d = actions::wkb_phase_shift(pot, ScatterPoint::new(l, p)?, ctx.hbar, quad)?;
            write_record(out, format, &PhaseRecord { l, p, hbar: ctx.hbar, delta: d.value, reduced: d.reduced(), err_estimate: d.err_estimate })?;
        }
        Command::Timedelay { l, e } => {
            let v = actions::time_delay(pot, *l, *e, quad)?;
            write_record(out, format, &TimeDelayRecord { l: *l, e: *e, value: v.value, err_estimate: v.err_estimate })?;
        }
        Command::Grid { which, lmin, lmax, pmin, pmax, nl, np } => {
            let grid = GridSpec { l_min: *lmin, l_max: *lmax, nl: *nl, p_min: *pmin, p_max: *pmax, np: *np };
            ctx.progress(err, &format!("evaluating {} grid points", grid.len()));
            let rows = drivers::grid_scan(pot, &grid, (*which).into(), quad)?;
            let missing = rows.iter().filter(|r| r.value.is_none()).count();
            if missing > 0 {
                ctx.progress(err, &format!("{missing} points could not be evaluated (left empty)"));
            }
            #[derive(Serialize)]
            struct Row {
                l: f64,
                p: f64,
                value: Option<f64>,
            }
            let rows: Vec<Row> = rows.into_iter().map(|r| Row { l: r.l, p: r.p, value: r.value }).collect();
            write_records(out, format, &rows)?;
        }
        Command::Deflect { point } => {
            let pt = ctx.point(point.l, point.p, point.e)?;
            let v = orbits::deflection_integral(pot, pt, quad)?;
            write_record(out, format, &DeflectRecord { l: pt.l, p: pt.p, deflection: v.value, err_estimate: v.err_estimate })?;
        }
        Command::Orbit { point, r_far, every } => {
            let pt = ctx.point(point.l, point.p, point.e)?;
            if *every == 0 {
                return Err(Failure::Usage("--every must be positive".into()));
            }
            let setup = ImpactSetup { r_far: *r_far, ..ImpactSetup::default() };
            let traj = orbits::integrate_orbit(pot, pt, &setup)?;
            let n = traj.samples.len();
            let samples: Vec<SampleRecord> = traj
                .samples
                .iter()
                .enumerate()
                .filter(|(i, _)| i % every == 0 || *i == n - 1)
                .map(|(_, s)| SampleRecord { t: s.t, x: s.x, y: s.y, px: s.px, py: s.py })
                .collect();
            let towards = if traj.escaped_forward() { "y = +inf" } else { "y = -inf" };
            ctx.progress(err, &format!("deflection {:.12} rad; leaves towards {towards}", traj.deflection));
            match format {
                Format::Csv => write_records(out, format, &samples)?,
                Format::Json => write_json(
                    out,
                    &OrbitDoc {
                        l: pt.l,
                        p: pt.p,
                        e: traj.e,
                        deflection: traj.deflection,
                        escaped_forward: traj.escaped_forward(),
                        energy_error: traj.max_energy_error(pot),
                        angular_momentum_error: traj.max_angular_momentum_error(),
                        samples,
                    },
                )?,
            }
        }
        Command::Loop { lmin, lmax, pmin, pmax, waypoints, samples, reverse } => {
            let mut path = match waypoints {
                Some(w) => LoopPath::new(parse_waypoints(w)?, true, *samples),
                None => LoopPath::rectangle(*lmin, *lmax, *pmin, *pmax, *samples),
            };
            if *reverse {
                path = path.reversed();
            }
            let r = orbits::loop_holonomy(pot, &path, quad)?;
            match format {
                Format::Csv => write_record(out, format, &LoopRecord { holonomy: r.holonomy, winding: r.winding, max_step: r.max_step, crossings: r.crossings.len() })?,
                Format::Json => write_json(
                    out,
                    &LoopDoc {
                        path: path_doc(&path),
                        holonomy: r.holonomy,
                        winding: r.winding,
                        max_step: r.max_step,
                        crossings: r.crossings.iter().map(|c| CrossingDoc { leg: c.leg, p: c.p, direction: c.direction, branch: branch_name(c.branch) }).collect(),
                    },
                )?,
            }
        }
        Command::Lattice { mmin, mmax, kmin, kmax, labels } => {
            ctx.progress(err, &format!("locating zeros in {} columns", (mmax - mmin + 1).max(0)));
            let zeros = drivers::zero_curves(pot, ctx.hbar, (*mmin, *mmax), (*kmin, *kmax), quad)?;
            for (m, e) in &zeros.failures {
                ctx.progress(err, &format!("column {m} skipped: {e}"));
            }
            if *labels {
                let rows: Vec<LabelledZeroRecord> = zeros.points().map(|z| LabelledZeroRecord { m: z.m, k: z.k, label: z.label }).collect();
                write_records(out, format, &rows)?;
            } else {
                let rows: Vec<ZeroRecord> = zeros.points().map(|z| ZeroRecord { m: z.m, k: z.k }).collect();
                write_records(out, format, &rows)?;
            }
            if !zeros.failures.is_empty() {
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Transport { m, label, shape, waypoints, samples, reverse, mmin, mmax, kmin, kmax } => {
            ctx.progress(err, "locating zeros");
            let zeros = drivers::zero_curves(pot, ctx.hbar, (*mmin, *mmax), (*kmin, *kmax), quad)?;
            let start = LatticeCell::unit(&zeros, *m, *label)?;
            let mut path = match waypoints {
                Some(w) => LoopPath::new(parse_waypoints(w)?, true, *samples),
                None => default_loop(*shape, *m, start.vertices[0].k, zeros.k_c, *samples),
            };
            if *reverse {
                path = path.reversed();
            }
            let report = transport_cell(&zeros, &start, &path)?;
            write_json(out, &transport_doc(&zeros, &path, &report))?;
        }
        Command::Verify { m_list, k_list, ppw, levels } => {
            let ms: Vec<i32> = parse_list(m_list, "--m-list")?;
            let ks: Vec<f64> = parse_list(k_list, "--k-list")?;
            let mesh = MeshSpec { points_per_wavelength: *ppw, levels: *levels, ..MeshSpec::default() };
            mesh.validate()?;
            ctx.progress(err, &format!("solving {} partial waves", ms.len() * ks.len()));
            let results = drivers::compare_wkb(pot, &ms, &ks, ctx.hbar, quad, &mesh);
            let mut rows = Vec::new();
            let mut failed = 0;
            for (m, k, r) in results {
                match r {
                    Ok(r) => rows.push(ComparisonRecord { m: r.m, k: r.k, delta_wkb: r.delta_wkb, delta_exact: r.delta_exact, abs_err: r.abs_err, rel_err: r.rel_err }),
                    Err(e) => {
                        failed += 1;
                        let _ = writeln!(err, "m = {m}, k = {k}: {e}");
                    }
                }
            }
            let significant = rows.iter().filter(|r| r.delta_exact.abs() > 0.05);
            let max_rel = significant.map(|r| r.rel_err).fold(0.0, f64::max);
            let max_abs = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
            ctx.progress(err, &format!("max rel_err (|delta| > 0.05) = {max_rel:.3e}; max abs_err = {max_abs:.3e}"));
            write_records(out, format, &rows)?;
            if failed > 0 {
                return Ok(EXIT_NUMERICAL);
            }
        }
    }
    Ok(0)
}
