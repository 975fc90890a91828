//! Command-line driver for the `supent` library.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure or internal numerical error |
//! | 2 | unparsable input file, bad flag, unknown family or parameter, invalid search configuration |
//! | 3 | state or coefficients not normalized within the I/O tolerance |
//! | 4 | the superposition has (near-)zero norm |
//! | 5 | family parameter outside the family's domain |
//!
//! Output goes to standard output unless `--output` names a file; files are
//! written to a temporary sibling and renamed into place, so a failed run
//! never leaves partial output behind.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use supent::entanglement::{
    self, biorthogonal_overlaps, check_biorthogonal_equality, check_general_bound, check_orthogonal_bound, classify,
    run_check, schmidt_spectrum, BoundReport, CheckKind, ConstraintClass, ORTHOGONALITY_TOL, SCHMIDT_RANK_TOL,
};
use supent::io::{self, ParseError};
use supent::search::{self, AlphaMode, Objective, SearchConfig};
use supent::state::{StateVector, Superposition, C64};
use supent::sweep::{self, GridError, SweepError};
use supent::Error;

/// Looser normalization tolerance for user-supplied states and coefficients.
pub const IO_NORM_TOL: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NORMALIZATION: i32 = 3;
pub const EXIT_ZERO_NORM: i32 = 4;
pub const EXIT_DOMAIN: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

type CliResult<T> = Result<T, CliError>;

/// Maps a library error raised while evaluating user input.
fn lib_error(context: &str, e: Error) -> CliError {
    let code = match &e {
        Error::NearZeroNorm { .. } => EXIT_ZERO_NORM,
        Error::NotNormalized { .. } | Error::CoefficientNormalization { .. } => EXIT_NORMALIZATION,
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } | Error::ZeroDimension { .. } => EXIT_PARSE,
        Error::OutOfDomain { .. } => EXIT_DOMAIN,
        _ => EXIT_IO,
    };
    CliError::new(code, format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "supent",
    version,
    about = "Entanglement of superpositions of bipartite pure states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement, Schmidt spectrum and Schmidt rank of a state file.
    Entropy {
        state: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bound report for `alpha phi + beta psi` with the constraint class detected.
    Superpose {
        phi: PathBuf,
        psi: PathBuf,
        #[command(flatten)]
        coeffs: CoeffArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Runs one named bound check on `alpha phi + beta psi`.
    Check {
        phi: PathBuf,
        psi: PathBuf,
        #[command(flatten)]
        coeffs: CoeffArgs,
        /// biorthogonal_equality, orthogonal_bound or general_bound.
        #[arg(long, value_parser = parse_check_kind)]
        bound: CheckKind,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sweeps an example family over a parameter grid and writes CSV.
    Family {
        #[arg(long)]
        name: String,
        /// `param=start:stop:steps[,log]`, comma-separated per parameter.
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seeded multi-restart search for extremal superpositions.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    /// Coefficient of phi as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Coefficient of psi as `re,im`.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "auto_beta",
        required_unless_present = "auto_beta"
    )]
    pub beta: Option<String>,
    /// Use the real `beta >= 0` with `|alpha|^2 + beta^2 = 1`.
    #[arg(long)]
    pub auto_beta: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Local dimension for both parties.
    #[arg(long, conflicts_with_all = ["dim_a", "dim_b"], required_unless_present_all = ["dim_a", "dim_b"])]
    pub d: Option<usize>,
    /// Local dimension of party A.
    #[arg(long, requires = "dim_b")]
    pub dim_a: Option<usize>,
    /// Local dimension of party B.
    #[arg(long, requires = "dim_a")]
    pub dim_b: Option<usize>,
    /// biorthogonal, orthogonal or general.
    #[arg(long)]
    pub constraint: ConstraintClass,
    /// gain, ratio or product_form_ratio.
    #[arg(long)]
    pub objective: Objective,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simplex iterations per restart.
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Simplex convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Hold |alpha| fixed at this value instead of searching it.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Worker threads for restarts; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Write the best pair to PREFIX.phi.json, PREFIX.psi.json and PREFIX.coeffs.json.
    #[arg(long, value_name = "PREFIX")]
    pub dump_best: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_check_kind(s: &str) -> Result<CheckKind, String> {
    match s {
        "biorthogonal_equality" => Ok(CheckKind::BiorthogonalEquality),
        "orthogonal_bound" => Ok(CheckKind::OrthogonalBound),
        "general_bound" => Ok(CheckKind::GeneralBound),
        other => Err(format!(
            "unknown bound `{other}` (expected biorthogonal_equality, orthogonal_bound or general_bound)"
        )),
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code. Diagnostics go to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match run(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

pub fn run(command: Command, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    match command {
        Command::Entropy { state, out } => {
            let text = to_json(&cmd_entropy(&state)?)?;
            emit(&out, stdout, &text)
        }
        Command::Superpose { phi, psi, coeffs, out } => {
            let text = to_json(&cmd_superpose(&phi, &psi, &coeffs)?)?;
            emit(&out, stdout, &text)
        }
        Command::Check {
            phi,
            psi,
            coeffs,
            bound,
            out,
        } => {
            let text = to_json(&cmd_check(&phi, &psi, &coeffs, bound)?)?;
            emit(&out, stdout, &text)
        }
        Command::Family { name, grid, out } => {
            let csv = cmd_family(&name, &grid)?;
            emit(&out, stdout, &csv)
        }
        Command::Search(args) => {
            let result = cmd_search(&args)?;
            emit(&args.out, stdout, &to_json(&result)?)
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s =
        serde_json::to_string_pretty(v).map_err(|e| CliError::new(EXIT_IO, format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &OutputArgs, stdout: &mut dyn std::io::Write, text: &str) -> CliResult<()> {
    match &out.output {
        Some(path) => write_atomic(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::new(EXIT_IO, format!("writing output: {e}"))),
    }
}

/// Writes `text` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::new(EXIT_IO, format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Reads and parses a state file, renormalizing within [`IO_NORM_TOL`].
pub fn load_state(path: &Path) -> CliResult<StateVector> {
    let name = path.display();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new(EXIT_IO, format!("{name}: {e}")))?;
    let state = io::parse_state_json(&text).map_err(|e| CliError::new(EXIT_PARSE, format!("{name}: {e}")))?;
    let norm = state.norm();
    if (norm - 1.0).abs() > IO_NORM_TOL {
        return Err(CliError::new(
            EXIT_NORMALIZATION,
            format!("{name}: field `amps` has norm {norm}, not 1 within {IO_NORM_TOL}"),
        ));
    }
    state.normalize().map_err(|e| lib_error(&name.to_string(), e))
}

/// Resolves `--alpha/--beta/--auto-beta` into coefficients with
/// `|alpha|^2 + |beta|^2 = 1` exactly.
pub fn resolve_coefficients(args: &CoeffArgs) -> CliResult<(C64, C64)> {
    let parse = |flag: &str, s: &str| {
        io::parse_complex(s).map_err(|e: ParseError| CliError::new(EXIT_PARSE, format!("--{flag}: {e}")))
    };
    let alpha = parse("alpha", &args.alpha)?;
    let a2 = alpha.norm_sqr();
    let beta = match &args.beta {
        Some(b) => parse("beta", b)?,
        None => {
            if a2 > 1.0 + IO_NORM_TOL {
                return Err(CliError::new(
                    EXIT_NORMALIZATION,
                    format!("--alpha: |alpha|^2 = {a2} exceeds 1, no real beta exists"),
                ));
            }
            C64::new((1.0 - a2).max(0.0).sqrt(), 0.0)
        }
    };
    let total = a2 + beta.norm_sqr();
    if (total - 1.0).abs() > IO_NORM_TOL {
        return Err(CliError::new(
            EXIT_NORMALIZATION,
            format!("--alpha/--beta: |alpha|^2 + |beta|^2 = {total}, not 1 within {IO_NORM_TOL}"),
        ));
    }
    let s = total.sqrt();
    Ok((alpha / s, beta / s))
}

fn load_superposition(phi: &Path, psi: &Path, coeffs: &CoeffArgs) -> CliResult<Superposition> {
    let (alpha, beta) = resolve_coefficients(coeffs)?;
    let phi_s = load_state(phi)?;
    let psi_s = load_state(psi)?;
    if phi_s.dims() != psi_s.dims() {
        return Err(CliError::new(
            EXIT_PARSE,
            format!(
                "{}: dimensions {:?} do not match {} with {:?}",
                psi.display(),
                psi_s.dims(),
                phi.display(),
                phi_s.dims()
            ),
        ));
    }
    Superposition::new(alpha, beta, phi_s, psi_s).map_err(|e| lib_error("superposition", e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub entanglement: f64,
    pub schmidt_coefficients: Vec<f64>,
    pub schmidt_probabilities: Vec<f64>,
    pub schmidt_rank: usize,
}

pub fn cmd_entropy(path: &Path) -> CliResult<EntropyReport> {
    let s = load_state(path)?;
    let spec = schmidt_spectrum(&s).map_err(|e| lib_error(&path.display().to_string(), e))?;
    Ok(EntropyReport {
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        entanglement: spec.entropy(),
        schmidt_probabilities: spec.probabilities(),
        schmidt_rank: spec.rank(SCHMIDT_RANK_TOL),
        schmidt_coefficients: spec.coeffs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl From<&BoundReport> for Verdict {
    fn from(r: &BoundReport) -> Self {
        Self {
            check: r.check,
            lhs: r.bound_lhs,
            rhs: r.bound_rhs,
            satisfied: r.satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperposeReport {
    /// Headline report for the detected class.
    #[serde(flatten)]
    pub report: BoundReport,
    pub overlap: [f64; 2],
    pub biorthogonal_overlaps: [f64; 2],
    /// Every check whose hypotheses the pair meets.
    pub verdicts: Vec<Verdict>,
}

pub fn cmd_superpose(phi: &Path, psi: &Path, coeffs: &CoeffArgs) -> CliResult<SuperposeReport> {
    let s = load_superposition(phi, psi, coeffs)?;
    let ctx = |e| lib_error("superpose", e);
    let class = classify(s.phi(), s.psi(), ORTHOGONALITY_TOL).map_err(ctx)?;
    let mut verdicts = Vec::new();
    if class == ConstraintClass::Biorthogonal {
        verdicts.push(Verdict::from(&check_biorthogonal_equality(&s).map_err(ctx)?));
    }
    if class != ConstraintClass::General {
        verdicts.push(Verdict::from(&check_orthogonal_bound(&s).map_err(ctx)?));
    }
    verdicts.push(Verdict::from(&check_general_bound(&s).map_err(ctx)?));
    let report = run_check(entanglement::check_for_class(class), &s).map_err(ctx)?;
    let ov = s.phi().inner(s.psi()).map_err(ctx)?;
    let (oa, ob) = biorthogonal_overlaps(s.phi(), s.psi()).map_err(ctx)?;
    Ok(SuperposeReport {
        report,
        overlap: [ov.re, ov.im],
        biorthogonal_overlaps: [oa, ob],
        verdicts,
    })
}

/// Runs `bound` regardless of the detected class; the report still records
/// the detected class so a mismatch is visible.
pub fn cmd_check(phi: &Path, psi: &Path, coeffs: &CoeffArgs, bound: CheckKind) -> CliResult<serde_json::Value> {
    let s = load_superposition(phi, psi, coeffs)?;
    let ctx = |e| lib_error("check", e);
    let class = classify(s.phi(), s.psi(), ORTHOGONALITY_TOL).map_err(ctx)?;
    let report = run_check(bound, &s).map_err(ctx)?;
    let applicable = match bound {
        CheckKind::BiorthogonalEquality => class == ConstraintClass::Biorthogonal,
        CheckKind::OrthogonalBound => class != ConstraintClass::General,
        _ => true,
    };
    let mut v = serde_json::to_value(&report).map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    v["constraint_class"] = json!(class);
    v["hypotheses_met"] = json!(applicable);
    Ok(v)
}

pub fn cmd_family(name: &str, grid: &str) -> CliResult<String> {
    let spec = sweep::parse_grid(grid).map_err(|e: GridError| CliError::new(EXIT_PARSE, format!("--grid: {e}")))?;
    let rows = sweep::sweep_family(name, &spec).map_err(|e| {
        let code = match e {
            SweepError::Domain { .. } => EXIT_DOMAIN,
            _ => EXIT_PARSE,
        };
        CliError::new(code, e.to_string())
    })?;
    sweep::render_csv(name, &rows).map_err(|e| CliError::new(EXIT_IO, format!("rendering CSV: {e}")))
}

pub fn search_config(args: &SearchArgs) -> CliResult<SearchConfig> {
    let (dim_a, dim_b) = match (args.d, args.dim_a, args.dim_b) {
        (Some(d), _, _) => (d, d),
        (None, Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CliError::new(
                EXIT_PARSE,
                "--d or both --dim-a and --dim-b are required",
            ))
        }
    };
    let mut c = SearchConfig::new(dim_a, dim_b, args.constraint, args.objective);
    c.restarts = args.restarts;
    c.seed = args.seed;
    c.max_iters_per_restart = args.max_iters;
    c.convergence_tol = args.tol;
    c.alpha_mode = args.alpha.map_or(AlphaMode::Free, AlphaMode::Fixed);
    c.validate()
        .map_err(|e| CliError::new(EXIT_PARSE, format!("invalid search flags: {e}")))?;
    if args.threads == 0 {
        return Err(CliError::new(EXIT_PARSE, "--threads must be at least 1"));
    }
    Ok(c)
}

pub fn cmd_search(args: &SearchArgs) -> CliResult<search::SearchResult> {
    let config = search_config(args)?;
    let result = search::optimize_parallel(&config, args.threads).map_err(|e| lib_error("search", e))?;
    if let (Some(prefix), Some(s)) = (&args.dump_best, &result.best_superposition) {
        dump_pair(prefix, s)?;
    }
    Ok(result)
}

/// Paths written by `--dump-best PREFIX`.
pub fn dump_paths(prefix: &Path) -> [PathBuf; 3] {
    let with = |suffix: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(suffix);
        PathBuf::from(p)
    };
    [with(".phi.json"), with(".psi.json"), with(".coeffs.json")]
}

pub fn dump_pair(prefix: &Path, s: &Superposition) -> CliResult<()> {
    let [phi, psi, coeffs] = dump_paths(prefix);
    write_atomic(&phi, &io::write_state_json(s.phi()))?;
    write_atomic(&psi, &io::write_state_json(s.psi()))?;
    write_atomic(&coeffs, &io::write_coefficients_json(s.alpha(), s.beta()))
}
