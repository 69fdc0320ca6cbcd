//! Command line front end. One [`run`] entry point parses the argument
//! vector, reads input files through [`crate::format`], dispatches into the
//! kernel, and renders a text or csv report.
//!
//! Exit codes: 0 on success, 1 when the computation itself raises a domain
//! error (a norm bound fails, a reduction is obstructed, a hypothesis is not
//! met), 2 when the invocation or an input file cannot be parsed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::derham::{self, AlgebraModel, Chart, CoverSpec, ModelKind, Overlap};
use crate::error::{Error, Result};
use crate::format;
use crate::ode::{self, DiffSystem};
use crate::opens::{self, GrowthClass};
use crate::padic::{Prime, Scalar};
use crate::series::{self, GrowthSeries, SeriesSpec};
use crate::tube::{self, CoefficientFamily, KoszulVector, TubePresentation};

/// Report style. Commands whose natural output is a dimension table
/// (`derham`, `cech`, `weak-fibration`) default to csv; everything else
/// defaults to text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Text,
    Csv,
}

/// A validated invocation: which subcommand ran, its input files, and the
/// shared numeric knobs. Invariants: the prime is prime, truncations are
/// `>= 1`, the weight bound is `>= 0`. Line 0 in the resulting parse errors
/// stands for the command line itself.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub prime: Option<Prime>,
    pub weight: i64,
    pub trunc: Option<i64>,
    pub trunc_sweep: Vec<i64>,
    pub n_max: i64,
    pub format: OutputMode,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        subcommand: &str,
        inputs: Vec<PathBuf>,
        prime: Option<u64>,
        weight: i64,
        trunc: Option<i64>,
        trunc_sweep: Vec<i64>,
        n_max: i64,
        format: OutputMode,
        output: Option<PathBuf>,
    ) -> Result<RunConfig> {
        let prime = match prime {
            Some(p) => {
                Some(Prime::new(p).map_err(|_| Error::parse(0, format!("{p} is not prime")))?)
            }
            None => None,
        };
        if let Some(n) = trunc {
            if n < 1 {
                return Err(Error::parse(0, format!("truncation must be at least 1, got {n}")));
            }
        }
        if trunc_sweep.iter().any(|&n| n < 1) {
            return Err(Error::parse(0, "every sweep truncation must be at least 1"));
        }
        if trunc.is_some() && !trunc_sweep.is_empty() {
            return Err(Error::parse(0, "choose either --trunc or --trunc-sweep, not both"));
        }
        if n_max < 0 {
            return Err(Error::parse(0, format!("--nmax must be nonnegative, got {n_max}")));
        }
        let mut sweep = trunc_sweep;
        sweep.sort_unstable();
        sweep.dedup();
        Ok(RunConfig {
            subcommand: subcommand.to_string(),
            inputs,
            prime,
            weight,
            trunc,
            trunc_sweep: sweep,
            n_max,
            format,
            output,
        })
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "tempered",
    about = "exact p-adic power series with growth-weighted norm certificates",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// input file; repeat the flag where a command reads several
    #[arg(long, value_name = "PATH")]
    input: Vec<PathBuf>,
    /// prime, for commands that build their own models
    #[arg(long)]
    prime: Option<u64>,
    /// growth weight n
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    weight: i64,
    /// truncation level, at least 1
    #[arg(long, allow_negative_numbers = true)]
    trunc: Option<i64>,
    /// comma separated truncation levels; one independent run per level,
    /// concatenated as csv with a leading N column
    #[arg(long = "trunc-sweep", value_delimiter = ',', allow_negative_numbers = true)]
    trunc_sweep: Vec<i64>,
    /// largest growth weight probed by classification
    #[arg(long = "nmax", default_value_t = 8, allow_negative_numbers = true)]
    nmax: i64,
    /// report style
    #[arg(long, value_enum)]
    format: Option<OutputMode>,
    /// write the report to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CommonOnly {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MembershipArgs {
    #[command(flatten)]
    common: Common,
    /// growth class name, see `lattice` for the catalogue
    #[arg(long)]
    class: String,
    /// exponent parameter of the open-disk class
    #[arg(long = "disk-exponent", allow_negative_numbers = true)]
    disk_exponent: Option<i64>,
}

#[derive(Args, Debug)]
struct DivideLinearArgs {
    #[command(flatten)]
    common: Common,
    /// leading coefficient g of the divisor g*t - g'
    #[arg(long)]
    g: String,
    /// constant coefficient g' of the divisor g*t - g'
    #[arg(long)]
    gprime: String,
    /// comma separated weights to certify; defaults to --weight alone
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    weights: Vec<i64>,
}

#[derive(Args, Debug)]
struct OdeArgs {
    #[command(flatten)]
    common: Common,
    /// number of Taylor steps to solve
    #[arg(long, allow_negative_numbers = true)]
    order: i64,
    /// also print the solution coefficients at the origin
    #[arg(long = "at-origin")]
    at_origin: bool,
}

#[derive(Args, Debug)]
struct OrderArgs {
    #[command(flatten)]
    common: Common,
    /// expansion order
    #[arg(long, allow_negative_numbers = true)]
    order: i64,
}

#[derive(Args, Debug)]
struct DerhamArgs {
    #[command(flatten)]
    common: Common,
    /// model name: tempered-disk, tate-disk, or laurent-annulus
    #[arg(long)]
    algebra: String,
    /// number of disk variables
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args, Debug)]
struct CechArgs {
    #[command(flatten)]
    common: Common,
    /// cover description file
    #[arg(long, value_name = "PATH")]
    cover: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WeakFibrationArgs {
    #[command(flatten)]
    common: Common,
    /// how many trivial tube directions to append
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    extend: i64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// weighted sup norm of a series
    Norm(CommonOnly),
    /// test a one-variable series against a growth class
    Membership(MembershipArgs),
    /// split a Laurent series into its finite and at-infinity pieces
    SplitCover(CommonOnly),
    /// dual pairing of two series with its norm bound
    Pair(CommonOnly),
    /// divide by the diagonal with a doubled-weight certificate
    DivideDiagonal(CommonOnly),
    /// divide by a linear unit polynomial with per-weight certificates
    DivideLinear(DivideLinearArgs),
    /// fundamental solution of a differential system
    OdeSolve(OdeArgs),
    /// re-expand a series around the generic point
    Tau(OrderArgs),
    /// log-growth order of a one-variable series
    Growth(CommonOnly),
    /// compare solution growth at the origin and the generic point
    Transfer(OrderArgs),
    /// reduce a relation-complex vector to a bounded representative
    KoszulReduce(CommonOnly),
    /// normal form of a function along a tube presentation
    NormalForm(CommonOnly),
    /// transport a coefficient family across a presentation change
    ChangePresentation(CommonOnly),
    /// cohomology dimensions of a built-in one-chart model
    Derham(DerhamArgs),
    /// cohomology dimensions of a cover via the total complex
    Cech(CechArgs),
    /// compare a tube complex against its trivially extended one
    WeakFibration(WeakFibrationArgs),
    /// catalogue of growth classes, inclusions, and the line cover
    Lattice(CommonOnly),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Norm(_) => "norm",
            Cmd::Membership(_) => "membership",
            Cmd::SplitCover(_) => "split-cover",
            Cmd::Pair(_) => "pair",
            Cmd::DivideDiagonal(_) => "divide-diagonal",
            Cmd::DivideLinear(_) => "divide-linear",
            Cmd::OdeSolve(_) => "ode-solve",
            Cmd::Tau(_) => "tau",
            Cmd::Growth(_) => "growth",
            Cmd::Transfer(_) => "transfer",
            Cmd::KoszulReduce(_) => "koszul-reduce",
            Cmd::NormalForm(_) => "normal-form",
            Cmd::ChangePresentation(_) => "change-presentation",
            Cmd::Derham(_) => "derham",
            Cmd::Cech(_) => "cech",
            Cmd::WeakFibration(_) => "weak-fibration",
            Cmd::Lattice(_) => "lattice",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Cmd::Norm(a)
            | Cmd::SplitCover(a)
            | Cmd::Pair(a)
            | Cmd::DivideDiagonal(a)
            | Cmd::Growth(a)
            | Cmd::KoszulReduce(a)
            | Cmd::NormalForm(a)
            | Cmd::ChangePresentation(a)
            | Cmd::Lattice(a) => &a.common,
            Cmd::Membership(a) => &a.common,
            Cmd::DivideLinear(a) => &a.common,
            Cmd::OdeSolve(a) => &a.common,
            Cmd::Tau(a) | Cmd::Transfer(a) => &a.common,
            Cmd::Derham(a) => &a.common,
            Cmd::Cech(a) => &a.common,
            Cmd::WeakFibration(a) => &a.common,
        }
    }

    fn default_format(&self) -> OutputMode {
        match self {
            Cmd::Derham(_) | Cmd::Cech(_) | Cmd::WeakFibration(_) => OutputMode::Csv,
            _ => OutputMode::Text,
        }
    }
}

/// Parse an argument vector (including the program name), run the chosen
/// subcommand, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match execute(&cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", render_error(&e));
            if e.is_parse() {
                2
            } else {
                1
            }
        }
    }
}

fn render_error(e: &Error) -> String {
    match e {
        Error::Parse { line: 0, msg } => format!("error: {msg}"),
        other => format!("error: {other}"),
    }
}

fn execute(cmd: &Cmd) -> Result<()> {
    let c = cmd.common();
    let cfg = RunConfig::new(
        cmd.name(),
        c.input.clone(),
        c.prime,
        c.weight,
        c.trunc,
        c.trunc_sweep.clone(),
        c.nmax,
        c.format.unwrap_or_else(|| cmd.default_format()),
        c.output.clone(),
    )?;
    if !cfg.trunc_sweep.is_empty() && !matches!(cmd, Cmd::Derham(_) | Cmd::Cech(_)) {
        return Err(Error::parse(0, "--trunc-sweep applies to derham and cech only"));
    }
    let report = dispatch(cmd, &cfg)?;
    match &cfg.output {
        Some(path) => fs::write(path, report)
            .map_err(|e| Error::parse(0, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{report}"),
    }
    Ok(())
}

fn dispatch(cmd: &Cmd, cfg: &RunConfig) -> Result<String> {
    match cmd {
        Cmd::Norm(_) => cmd_norm(cfg),
        Cmd::Membership(a) => cmd_membership(cfg, a),
        Cmd::SplitCover(_) => cmd_split_cover(cfg),
        Cmd::Pair(_) => cmd_pair(cfg),
        Cmd::DivideDiagonal(_) => cmd_divide_diagonal(cfg),
        Cmd::DivideLinear(a) => cmd_divide_linear(cfg, a),
        Cmd::OdeSolve(a) => cmd_ode_solve(cfg, a),
        Cmd::Tau(a) => cmd_tau(cfg, a),
        Cmd::Growth(_) => cmd_growth(cfg),
        Cmd::Transfer(a) => cmd_transfer(cfg, a),
        Cmd::KoszulReduce(_) => cmd_koszul_reduce(cfg),
        Cmd::NormalForm(_) => cmd_normal_form(cfg),
        Cmd::ChangePresentation(_) => cmd_change_presentation(cfg),
        Cmd::Derham(a) => cmd_derham(cfg, a),
        Cmd::Cech(a) => cmd_cech(cfg, a),
        Cmd::WeakFibration(a) => cmd_weak_fibration(cfg, a),
        Cmd::Lattice(_) => cmd_lattice(cfg),
    }
}

// ---- file loading -------------------------------------------------------

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::parse(0, format!("cannot read {}: {e}", path.display())))
}

fn tag_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, msg } => Error::parse(line, format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn load_series(path: &Path) -> Result<GrowthSeries> {
    format::parse_series(&read_input(path)?).map_err(|e| tag_path(path, e))
}

fn load_system(path: &Path) -> Result<DiffSystem> {
    format::parse_system(&read_input(path)?).map_err(|e| tag_path(path, e))
}

fn load_presentation(path: &Path) -> Result<TubePresentation> {
    format::parse_presentation(&read_input(path)?).map_err(|e| tag_path(path, e))
}

fn load_cover(path: &Path) -> Result<CoverSpec> {
    format::parse_cover(&read_input(path)?).map_err(|e| tag_path(path, e))
}

fn want_inputs<'a>(cfg: &'a RunConfig, k: usize, what: &str) -> Result<&'a [PathBuf]> {
    if cfg.inputs.len() != k {
        return Err(Error::parse(
            0,
            format!("{} expects {k} --input file(s): {what}", cfg.subcommand),
        ));
    }
    Ok(&cfg.inputs)
}

fn usize_order(order: i64) -> Result<usize> {
    usize::try_from(order).map_err(|_| Error::parse(0, "--order must be nonnegative"))
}

// ---- subcommands --------------------------------------------------------

fn cmd_norm(cfg: &RunConfig) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a series")?[0])?;
    let v = f.norm_weighted(cfg.weight);
    Ok(match cfg.format {
        OutputMode::Text => format!("{}\n", v.value()),
        OutputMode::Csv => format!("weight,norm\n{},{}\n", cfg.weight, v.value()),
    })
}

fn cmd_membership(cfg: &RunConfig, args: &MembershipArgs) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a series")?[0])?;
    let class = GrowthClass::parse(&args.class, args.disk_exponent)
        .map_err(|e| Error::parse(0, e.to_string()))?;
    let rep = opens::membership(&f, class, cfg.n_max)?;
    Ok(match cfg.format {
        OutputMode::Text => format!("{rep}\n"),
        OutputMode::Csv => {
            let mut out = String::from("truncation,norm\n");
            for (t, v) in rep.truncations.iter().zip(&rep.profile) {
                let _ = writeln!(out, "{t},{}", v.value());
            }
            out
        }
    })
}

fn cmd_split_cover(cfg: &RunConfig) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a Laurent series")?[0])?;
    let s = opens::split_cover(&f, cfg.n_max)?;
    Ok(match cfg.format {
        OutputMode::Text => format!(
            "at-infinity piece: {} terms\n{}\n\nfinite piece: {} terms\n{}\n",
            s.inf.support().count(),
            s.inf_report,
            s.fast.support().count(),
            s.fast_report
        ),
        OutputMode::Csv => format!(
            "piece,terms,verdict\ninfinity,{},{}\nfinite,{},{}\n",
            s.inf.support().count(),
            s.inf_report.verdict,
            s.fast.support().count(),
            s.fast_report.verdict
        ),
    })
}

fn cmd_pair(cfg: &RunConfig) -> Result<String> {
    let ins = want_inputs(cfg, 2, "two series on the same window")?;
    let f = load_series(&ins[0])?;
    let g = load_series(&ins[1])?;
    let d = opens::pair_dual(&f, &g, cfg.weight)?;
    Ok(match cfg.format {
        OutputMode::Text => format!(
            "value: {}\nabs: {}\nleft norm at weight {}: {}\nright norm at weight {}: {}\nbound: {}\n",
            d.value,
            d.abs.value(),
            d.weight,
            d.left_norm.value(),
            -d.weight,
            d.right_norm.value(),
            d.bound.value()
        ),
        OutputMode::Csv => format!(
            "value,abs,left_norm,right_norm,bound\n{},{},{},{},{}\n",
            d.value,
            d.abs.value(),
            d.left_norm.value(),
            d.right_norm.value(),
            d.bound.value()
        ),
    })
}

fn cmd_divide_diagonal(cfg: &RunConfig) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a two-variable series")?[0])?;
    let d = series::divide_diagonal(&f, cfg.weight)?;
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "# weight: {}", d.weight);
            let _ = writeln!(out, "# input norm: {}", d.input_norm.value());
            let _ = writeln!(out, "# quotient norm at doubled weight: {}", d.quotient_norm.value());
            let _ = writeln!(out, "# bound: {}", d.bound.value());
            let _ = writeln!(out, "# exact through total degree: {}", d.exact_total_degree);
            out + &format::emit_series(&d.quotient)
        }
        OutputMode::Csv => format!(
            "weight,input_norm,quotient_norm,bound,exact_total_degree\n{},{},{},{},{}\n",
            d.weight,
            d.input_norm.value(),
            d.quotient_norm.value(),
            d.bound.value(),
            d.exact_total_degree
        ),
    })
}

fn cmd_divide_linear(cfg: &RunConfig, args: &DivideLinearArgs) -> Result<String> {
    let h = load_series(&want_inputs(cfg, 1, "a one-variable series")?[0])?;
    let g = format::parse_rational(&args.g)
        .map_err(|_| Error::parse(0, format!("--g: malformed rational `{}`", args.g)))?;
    let gp = format::parse_rational(&args.gprime)
        .map_err(|_| Error::parse(0, format!("--gprime: malformed rational `{}`", args.gprime)))?;
    let weights = if args.weights.is_empty() { vec![cfg.weight] } else { args.weights.clone() };
    let d = series::divide_linear(&h, &g, &gp, &weights)?;
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = String::new();
            for c in &d.certificates {
                let _ = writeln!(
                    out,
                    "# weight {}: input norm {} ; quotient norm {}",
                    c.weight,
                    c.input_norm.value(),
                    c.quotient_norm.value()
                );
            }
            out + &format::emit_series(&d.quotient)
        }
        OutputMode::Csv => {
            let mut out = String::from("weight,input_norm,quotient_norm\n");
            for c in &d.certificates {
                let _ =
                    writeln!(out, "{},{},{}", c.weight, c.input_norm.value(), c.quotient_norm.value());
            }
            out
        }
    })
}

fn cmd_ode_solve(cfg: &RunConfig, args: &OdeArgs) -> Result<String> {
    let sys = load_system(&want_inputs(cfg, 1, "a differential system")?[0])?;
    let order = usize_order(args.order)?;
    let sol = ode::cauchy_solve(&sys, order)?;
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = format!("order: {}\n", sol.order);
            for (m, step) in sol.generic.iter().enumerate() {
                let _ = writeln!(out, "step {m}: gauss norm {}", step.gauss_norm().value());
                if args.at_origin {
                    let mat = &sol.origin[m];
                    for i in 0..mat.nrows() {
                        let row: Vec<String> =
                            (0..mat.ncols()).map(|j| mat.get(i, j).to_string()).collect();
                        let _ = writeln!(out, "  {}", row.join(" "));
                    }
                }
            }
            out
        }
        OutputMode::Csv => {
            if args.at_origin {
                let mut out = String::from("step,row,col,entry\n");
                for (m, mat) in sol.origin.iter().enumerate() {
                    for i in 0..mat.nrows() {
                        for j in 0..mat.ncols() {
                            let _ = writeln!(out, "{m},{i},{j},{}", mat.get(i, j));
                        }
                    }
                }
                out
            } else {
                let mut out = String::from("step,gauss_norm\n");
                for (m, step) in sol.generic.iter().enumerate() {
                    let _ = writeln!(out, "{m},{}", step.gauss_norm().value());
                }
                out
            }
        }
    })
}

fn cmd_tau(cfg: &RunConfig, args: &OrderArgs) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a one-variable series")?[0])?;
    let t = ode::taylor_generic(&f, args.order)?;
    Ok(format::emit_series(&t))
}

fn cmd_growth(cfg: &RunConfig) -> Result<String> {
    let f = load_series(&want_inputs(cfg, 1, "a one-variable series")?[0])?;
    if f.spec().arity() != 1 {
        return Err(Error::ClassMismatch("growth grading reads one-variable series".into()));
    }
    if !f.spec().is_power() {
        return Err(Error::LaurentUnsupported("growth grading"));
    }
    let hi = f.spec().windows()[0].hi;
    let seq: Vec<Scalar> = (0..=hi).map(|i| f.coeff(&[i])).collect();
    let rep = ode::log_growth_estimate(&seq, f.prime(), cfg.n_max)?;
    Ok(match cfg.format {
        OutputMode::Text => format!("{rep}\n"),
        OutputMode::Csv => {
            let mut out = String::from("weight,truncation,norm\n");
            for (w, norms) in &rep.profiles {
                for (t, v) in rep.truncations.iter().zip(norms) {
                    let _ = writeln!(out, "{w},{t},{}", v.value());
                }
            }
            out
        }
    })
}

fn cmd_transfer(cfg: &RunConfig, args: &OrderArgs) -> Result<String> {
    let sys = load_system(&want_inputs(cfg, 1, "a differential system")?[0])?;
    let order = usize_order(args.order)?;
    let rep = ode::transfer_experiment(&sys, order, cfg.n_max)?;
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = format!("verdict: {}\n", rep.verdict);
            out.push_str("step norms (generic / origin):\n");
            for (m, (g, o)) in rep.generic_norms.iter().zip(&rep.origin_norms).enumerate() {
                let _ = writeln!(out, "  step {m}: {} / {}", g.value(), o.value());
            }
            let _ = write!(out, "generic growth:\n{}\n", rep.generic);
            let _ = write!(out, "origin growth:\n{}\n", rep.origin);
            out
        }
        OutputMode::Csv => {
            let mut out = String::from("step,generic_norm,origin_norm\n");
            for (m, (g, o)) in rep.generic_norms.iter().zip(&rep.origin_norms).enumerate() {
                let _ = writeln!(out, "{m},{},{}", g.value(), o.value());
            }
            out
        }
    })
}

fn cmd_koszul_reduce(cfg: &RunConfig) -> Result<String> {
    if cfg.inputs.len() < 2 {
        return Err(Error::parse(
            0,
            "koszul-reduce expects a presentation then one series per tube variable",
        ));
    }
    let pres = load_presentation(&cfg.inputs[0])?;
    let s = pres.tube_dim();
    if cfg.inputs.len() != s + 1 {
        return Err(Error::parse(
            0,
            format!("the presentation has {s} tube variables, got {} components", cfg.inputs.len() - 1),
        ));
    }
    let comps: Vec<GrowthSeries> =
        cfg.inputs[1..].iter().map(|p| load_series(p)).collect::<Result<_>>()?;
    let h = KoszulVector::new(comps)?;
    let (d, cert) = tube::koszul_reduce(&h, &pres, cfg.weight)?;
    if !cert.is_clean() {
        return Err(Error::KoszulSolveFailed(format!(
            "{} obstructed indices, first at {:?} with level {}",
            cert.obstructions.len(),
            cert.obstructions[0].0,
            cert.obstructions[0].1.value()
        )));
    }
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = format!("{cert}\n");
            for (i, comp) in d.components().iter().enumerate() {
                let _ = write!(out, "\ncomponent {}:\n{}", i + 1, format::emit_series(comp));
            }
            out
        }
        OutputMode::Csv => format!(
            "weight,scale,input_norm,pairing_norm,output_norm,corrections\n{},{},{},{},{},{}\n",
            cert.weight,
            cert.scale,
            cert.input_norm.value(),
            cert.psi_norm.value(),
            cert.output_norm.value(),
            cert.corrections.len()
        ),
    })
}

fn cmd_normal_form(cfg: &RunConfig) -> Result<String> {
    let ins = want_inputs(cfg, 2, "a presentation then a series on the joint variables")?;
    let pres = load_presentation(&ins[0])?;
    let g = load_series(&ins[1])?;
    let nf = tube::tube_normal_form(&g, &pres)?;
    Ok(format::emit_series(&nf))
}

fn cmd_change_presentation(cfg: &RunConfig) -> Result<String> {
    let ins = want_inputs(cfg, 2, "a coefficient family then a relation")?;
    let fam_series = load_series(&ins[0])?;
    if !fam_series.spec().is_power() {
        return Err(Error::LaurentUnsupported("coefficient families"));
    }
    let family = CoefficientFamily::new(
        fam_series.prime(),
        fam_series.spec().arity(),
        fam_series.support().map(|(i, c)| (i.clone(), c.clone())),
    )?;
    let rel = format::parse_relation(&read_input(&ins[1])?).map_err(|e| tag_path(&ins[1], e))?;
    let (out_family, cert) = tube::change_presentation(&family, &rel, cfg.weight)?;
    match cfg.format {
        OutputMode::Text => {
            let names: Vec<String> =
                (1..=out_family.arity()).map(|i| format!("g{i}")).collect();
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let hi = out_family
                .support()
                .flat_map(|(idx, _)| idx.iter().copied())
                .max()
                .unwrap_or(0)
                .max(1);
            let spec = SeriesSpec::power(out_family.prime(), &name_refs, hi)?;
            let carrier = GrowthSeries::from_coeffs(
                spec,
                out_family.support().map(|(i, c)| (i.clone(), c.clone())),
            )?;
            Ok(format!("# {cert}\n{}", format::emit_series(&carrier)))
        }
        OutputMode::Csv => {
            let mut out = String::from("index,coeff\n");
            for (idx, c) in out_family.support() {
                let joined: Vec<String> = idx.iter().map(|j| j.to_string()).collect();
                let _ = writeln!(out, "{},{c}", joined.join(";"));
            }
            Ok(out)
        }
    }
}

fn algebra_model(name: &str, prime: Prime, dim: usize, trunc: i64) -> Result<AlgebraModel> {
    match name {
        "tempered-disk" | "tempered-polydisk" => AlgebraModel::tempered_polydisk(prime, dim, trunc),
        "tate-disk" | "tate-polydisk" => AlgebraModel::tate_polydisk(prime, dim, trunc),
        "laurent-annulus" | "annulus" => {
            if dim != 1 {
                return Err(Error::parse(0, "the annulus model is one dimensional"));
            }
            AlgebraModel::laurent_annulus(prime, trunc)
        }
        other => Err(Error::parse(0, format!("unknown algebra `{other}`"))),
    }
}

fn dims_text(dims: &[i64]) -> String {
    let mut out = String::new();
    for (k, d) in dims.iter().enumerate() {
        let _ = writeln!(out, "degree {k}: {d}");
    }
    out
}

fn dims_sweep_csv(runs: &[(i64, Vec<i64>)]) -> String {
    let mut out = String::from("N,degree,dim\n");
    for (n, dims) in runs {
        for (k, d) in dims.iter().enumerate() {
            let _ = writeln!(out, "{n},{k},{d}");
        }
    }
    out
}

fn cmd_derham(cfg: &RunConfig, args: &DerhamArgs) -> Result<String> {
    want_inputs(cfg, 0, "derham builds its model from flags")?;
    let prime = match cfg.prime {
        Some(p) => p,
        None => Prime::new(2)?,
    };
    let compute = |n: i64| -> Result<Vec<i64>> {
        let model = algebra_model(&args.algebra, prime, args.dim, n)?;
        Ok(derham::de_rham_complex(&model)?.cohomology_dims())
    };
    if !cfg.trunc_sweep.is_empty() {
        let mut runs = Vec::new();
        for &n in &cfg.trunc_sweep {
            runs.push((n, compute(n)?));
        }
        return Ok(dims_sweep_csv(&runs));
    }
    let n = cfg.trunc.ok_or_else(|| Error::parse(0, "derham needs --trunc"))?;
    let dims = compute(n)?;
    Ok(match cfg.format {
        OutputMode::Csv => format::emit_dims_csv(&dims),
        OutputMode::Text => dims_text(&dims),
    })
}

fn model_at_trunc(model: &AlgebraModel, trunc: i64) -> Result<AlgebraModel> {
    let vars: Vec<&str> = model.vars().iter().map(|s| s.as_str()).collect();
    let built = match model.kind() {
        ModelKind::TemperedPolydisk | ModelKind::Tube => {
            AlgebraModel::tempered_polydisk(model.prime(), model.dim(), trunc)?
        }
        ModelKind::TatePolydisk => AlgebraModel::tate_polydisk(model.prime(), model.dim(), trunc)?,
        ModelKind::LaurentAnnulus => AlgebraModel::laurent_annulus(model.prime(), trunc)?,
    };
    built.with_vars(&vars)
}

fn cover_at_trunc(cover: &CoverSpec, trunc: i64) -> Result<CoverSpec> {
    let charts: Vec<Chart> = cover
        .charts()
        .iter()
        .map(|c| {
            Ok(Chart { name: c.name.clone(), model: model_at_trunc(&c.model, trunc)? })
        })
        .collect::<Result<_>>()?;
    let overlaps: Vec<Overlap> = cover
        .overlaps()
        .iter()
        .map(|o| {
            Ok(Overlap {
                left: o.left.clone(),
                right: o.right.clone(),
                model: model_at_trunc(&o.model, trunc)?,
                left_map: o.left_map.clone(),
                right_map: o.right_map.clone(),
            })
        })
        .collect::<Result<_>>()?;
    CoverSpec::new(charts, overlaps)
}

fn cmd_cech(cfg: &RunConfig, args: &CechArgs) -> Result<String> {
    let path = match (&args.cover, cfg.inputs.first()) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(Error::parse(0, "cech needs --cover")),
    };
    let cover = load_cover(&path)?;
    if !cfg.trunc_sweep.is_empty() {
        let mut runs = Vec::new();
        for &n in &cfg.trunc_sweep {
            let dims = derham::cech_de_rham(&cover_at_trunc(&cover, n)?)?.cohomology_dims();
            runs.push((n, dims));
        }
        return Ok(dims_sweep_csv(&runs));
    }
    let dims = match cfg.trunc {
        Some(n) => derham::cech_de_rham(&cover_at_trunc(&cover, n)?)?.cohomology_dims(),
        None => derham::cech_de_rham(&cover)?.cohomology_dims(),
    };
    Ok(match cfg.format {
        OutputMode::Csv => format::emit_dims_csv(&dims),
        OutputMode::Text => dims_text(&dims),
    })
}

fn cmd_weak_fibration(cfg: &RunConfig, args: &WeakFibrationArgs) -> Result<String> {
    let pres = load_presentation(&want_inputs(cfg, 1, "a tube presentation")?[0])?;
    let rep = derham::compare_weak_fibration(&pres, args.extend)?;
    Ok(match cfg.format {
        OutputMode::Text => format!("{rep}\n"),
        OutputMode::Csv => {
            let rows = rep.base.len().max(rep.extended.len());
            let mut out = String::from("degree,base,extended\n");
            for k in 0..rows {
                let b = rep.base.get(k).copied().unwrap_or(0);
                let e = rep.extended.get(k).copied().unwrap_or(0);
                let _ = writeln!(out, "{k},{b},{e}");
            }
            out
        }
    })
}

fn cmd_lattice(cfg: &RunConfig) -> Result<String> {
    want_inputs(cfg, 0, "lattice reads no files")?;
    let cover = opens::cover_fact();
    Ok(match cfg.format {
        OutputMode::Text => {
            let mut out = String::from("classes:\n");
            for entry in opens::catalog() {
                let _ = writeln!(out, "  {}: {}", entry.name, entry.summary);
            }
            out.push_str("inclusions:\n");
            for fact in opens::lattice_relations() {
                let _ = writeln!(
                    out,
                    "  {} <= {}: {}",
                    fact.smaller.cli_name(),
                    fact.larger.cli_name(),
                    fact.why
                );
            }
            let _ = writeln!(
                out,
                "cover:\n  {} and {} meet in {}: {}",
                cover.pieces.0.cli_name(),
                cover.pieces.1.cli_name(),
                cover.intersection.cli_name(),
                cover.note
            );
            out
        }
        OutputMode::Csv => {
            let mut out = String::from("smaller,larger\n");
            for fact in opens::lattice_relations() {
                let _ = writeln!(out, "{},{}", fact.smaller.cli_name(), fact.larger.cli_name());
            }
            out
        }
    })
}
