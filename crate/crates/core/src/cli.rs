//! Batch command-line front end.
//!
//! Every report is a JSON envelope `{tool, version, command, config,
//! tolerances, result}` or a CSV table preceded by `#` comment lines carrying
//! the same header. `gen` and `relation` write bare matrix/relation JSON so
//! their output can be fed back in.
//!
//! Exit codes: 0 success, 2 negative classification, 1 error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::diffop::{
    accretivity_equivalence_check, galerkin_adjoint_matrix, galerkin_matrix, obstruction_sweep, AccretivityEquivalence, DiffOpProblem,
    DiffopError, GalerkinBasis, ObstructionReport,
};
use crate::numlin::random::{random_contraction, random_normal, seeded};
use crate::numlin::{hermitian_eigenvalues, normalized, ComplexMatrix, NumlinError, DEFAULT_RANK_TOL, DEFAULT_SYMMETRY_TOL};
use crate::oprange::{classify_operator, range_boundary, real_part, OprangeError, SectorReport};
use crate::relcalc::{
    cayley_triple, classify_relation, is_m_sectorial, random_sectorial_operator, random_sectorial_relation, relation_from_contraction,
    relation_from_graph, rotate_relation, satisfies_sector_inequality, ContractionTriple, LinearRelation, RelationFlags, RelcalcError,
    SINGULAR_RATIO,
};
use crate::spectheory::{
    factorize, normal_asymptotics_check, resolvent_schatten_profile, sector_spectrum_report, SpectheoryError, DEFAULT_PROBES,
    SHIFT_SINGULAR_RATIO,
};

pub const TOOL: &str = "sectorial";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "SECTORIAL_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numlin(#[from] NumlinError),
    #[error(transparent)]
    Oprange(#[from] OprangeError),
    #[error(transparent)]
    Relcalc(#[from] RelcalcError),
    #[error(transparent)]
    Spectheory(#[from] SpectheoryError),
    #[error(transparent)]
    Diffop(#[from] DiffopError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Io { .. } => "cli::IoError",
            Self::Parse { .. } => "cli::ParseError",
            Self::Usage(_) => "cli::UsageError",
            Self::Numlin(e) => e.code(),
            Self::Oprange(e) => e.code(),
            Self::Relcalc(e) => e.code(),
            Self::Spectheory(e) => e.code(),
            Self::Diffop(e) => e.code(),
        }
    }

    /// Errors that answer the question asked in the negative.
    pub fn is_negative(&self) -> bool {
        matches!(
            self,
            Self::Relcalc(RelcalcError::NotMaximal { .. })
                | Self::Spectheory(SpectheoryError::NotSectorial | SpectheoryError::NotNormal { .. })
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_negative() {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Parse an angle in radians, or in degrees with a `deg` suffix.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, deg) = match s.strip_suffix("deg") {
        Some(rest) => (rest.trim(), true),
        None => (s, false),
    };
    let v: f64 = num.parse().map_err(|_| format!("not an angle: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("angle must be finite: {s:?}"));
    }
    Ok(if deg { v.to_radians() } else { v })
}

/// Schatten order: a number ≥ 1 or `inf`.
pub fn parse_order(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| format!("not a Schatten order: {s:?}")),
    }
}

fn ser_order<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Sectorial operators and linear relations in finite dimension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output path; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Absolute tolerance for sign tests.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sampled boundary of the numerical range.
    Range(RangeArgs),
    /// Sector classification of a matrix or relation.
    Classify(ClassifyArgs),
    /// Build a relation in canonical form.
    Relation(RelationArgs),
    /// The contractions K, V, W of an m-sectorial relation.
    Cayley(CayleyArgs),
    /// Spectrum against the minimal sector, or the normal-case identity.
    Spectrum(SpectrumArgs),
    /// T + α = S P S with S = T_R + α.
    Factorize(FactorizeArgs),
    /// Schatten norms of (T + α)⁻¹ and (T_R + α)⁻¹.
    Schatten(SchattenArgs),
    /// First-order differential expressions u′ + Au.
    #[command(subcommand)]
    Diffop(DiffopCommand),
    /// Seeded random test input.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RangeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    /// Matrix or relation JSON.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_angle)]
    pub phi: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationSource {
    /// Graph of the input matrix, or the input relation itself.
    Graph,
    /// Inverse Cayley map of the input contraction.
    Contraction,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RelationArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = RelationSource::Graph)]
    pub from: RelationSource,
    /// Multiply the value components by e^{iφ}.
    #[arg(long, value_parser = parse_angle)]
    pub rotate: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CayleyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_angle)]
    pub phi: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Check spec(T_R) = Re spec(T) for a normal matrix instead.
    #[arg(long)]
    pub normal: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FactorizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PROBES)]
    pub probes: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SchattenArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_order)]
    #[serde(serialize_with = "ser_order")]
    pub p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemArgs {
    /// Problem JSON `{a, b, A, K, grid_points, basis_size}`.
    #[arg(long = "in", conflicts_with_all = ["a", "b", "coefficient", "boundary"])]
    pub input: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Coefficient matrix JSON.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub coefficient: Option<PathBuf>,
    /// Boundary contraction JSON, u(a) = K u(b); zero when absent.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub boundary: Option<PathBuf>,
    /// Quadrature intervals (raised to 64·n for mode n).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Galerkin basis size.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum DiffopCommand {
    /// Rayleigh quotients of the boundary-free test family.
    Sweep(SweepArgs),
    /// Galerkin matrix on the sine basis.
    Galerkin(GalerkinArgs),
    /// Galerkin accretivity against coefficient accretivity.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// `e<k>` for the k-th unit vector, or a path to a vector JSON (normalized on read).
    #[arg(long, default_value = "e1")]
    pub f: String,
    #[arg(long, default_value_t = 100)]
    pub nmax: usize,
    /// Target semi-angle to rule out.
    #[arg(long, value_parser = parse_angle)]
    pub phi: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GalerkinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    /// Emit the matrix of the formal adjoint instead.
    #[arg(long)]
    pub adjoint: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    /// Sectorial matrix with semi-angle at most φ.
    Operator,
    /// Graph of a sectorial matrix.
    Relation,
    Contraction,
    Normal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Operator)]
    pub kind: GenKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_angle)]
    pub phi: Option<f64>,
    /// Contractions only: force norm exactly one.
    #[arg(long)]
    pub touch_unit: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct Tolerances {
    tol: f64,
    symmetry_tol: f64,
    rank_tol: f64,
    cayley_singular_ratio: f64,
    shift_singular_ratio: f64,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    tolerances: Tolerances,
    result: &'a R,
}

/// A finished command: what to write and which exit code to return.
pub struct Output {
    pub body: String,
    pub exit: i32,
}

fn tolerances(tol: f64) -> Tolerances {
    Tolerances {
        tol,
        symmetry_tol: DEFAULT_SYMMETRY_TOL,
        rank_tol: DEFAULT_RANK_TOL,
        cayley_singular_ratio: SINGULAR_RATIO,
        shift_singular_ratio: SHIFT_SINGULAR_RATIO,
    }
}

fn report<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    common: &Common,
    result: &R,
    csv: Option<String>,
    default: Format,
    exit: i32,
) -> Result<Output, CliError> {
    let body = match common.format.unwrap_or(default) {
        Format::Json => {
            let env = Envelope {
                tool: TOOL,
                version: VERSION,
                command,
                config,
                tolerances: tolerances(common.tol),
                result,
            };
            let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let table = csv.ok_or_else(|| CliError::Usage(format!("{command} has no CSV form")))?;
            let config = serde_json::to_string(config).map_err(|e| CliError::Usage(e.to_string()))?;
            let tols = serde_json::to_string(&tolerances(common.tol)).map_err(|e| CliError::Usage(e.to_string()))?;
            format!("# tool: {TOOL} {VERSION}\n# command: {command}\n# config: {config}\n# tolerances: {tols}\n{table}")
        }
    };
    Ok(Output { body, exit })
}

fn bare<T: Serialize>(value: &T, common: &Common) -> Result<Output, CliError> {
    if common.format == Some(Format::Csv) {
        return Err(CliError::Usage("this command writes JSON only".into()));
    }
    let mut body = serde_json::to_string(value).map_err(|e| CliError::Usage(e.to_string()))?;
    body.push('\n');
    Ok(Output { body, exit: 0 })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

enum Operand {
    Matrix(ComplexMatrix),
    Relation(LinearRelation),
}

/// Matrix JSON, or relation JSON when the object has a `basis` field.
fn read_operand(path: &Path) -> Result<Operand, CliError> {
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |e: serde_json::Error| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if value.get("basis").is_some() {
        Ok(Operand::Relation(serde_json::from_value(value).map_err(parse_err)?))
    } else {
        Ok(Operand::Matrix(serde_json::from_value(value).map_err(parse_err)?))
    }
}

fn read_relation(path: &Path) -> Result<LinearRelation, CliError> {
    Ok(match read_operand(path)? {
        Operand::Matrix(t) => relation_from_graph(&t)?,
        Operand::Relation(r) => r,
    })
}

fn build_problem(p: &ProblemArgs) -> Result<DiffOpProblem, CliError> {
    let mut prob = match &p.input {
        Some(path) => read_json::<DiffOpProblem>(path)?,
        None => {
            let missing = |flag: &str| CliError::Usage(format!("--{flag} is required without --in"));
            let a = p.a.ok_or_else(|| missing("a"))?;
            let b = p.b.ok_or_else(|| missing("b"))?;
            let coef: ComplexMatrix = read_json(p.coefficient.as_deref().ok_or_else(|| missing("A"))?)?;
            let d = coef.rows();
            let k = match &p.boundary {
                Some(path) => read_json(path)?,
                None => ComplexMatrix::zeros(d, d),
            };
            DiffOpProblem::new(a, b, coef, k, 1024, 8)?
        }
    };
    if let Some(g) = p.grid {
        prob.grid_points = g;
    }
    if let Some(m) = p.m {
        prob.basis_size = m;
    }
    prob.validate()?;
    Ok(prob)
}

fn read_direction(spec: &str, d: usize) -> Result<Vec<Complex64>, CliError> {
    if let Some(k) = spec.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
        if k == 0 || k > d {
            return Err(CliError::Usage(format!("direction {spec} out of range for dimension {d}")));
        }
        return Ok((0..d).map(|i| Complex64::new(if i + 1 == k { 1.0 } else { 0.0 }, 0.0)).collect());
    }
    let m: ComplexMatrix = read_json(Path::new(spec))?;
    if m.rows().min(m.cols()) != 1 {
        return Err(CliError::Usage(format!("{spec}: direction must be a single row or column")));
    }
    normalized(&m.to_row_major()).ok_or_else(|| CliError::Usage(format!("{spec}: direction is zero")))
}

#[derive(Serialize)]
struct RelationClassification {
    phi: f64,
    flags: RelationFlags,
    m_sectorial: bool,
    sector_inequality: bool,
}

#[derive(Serialize)]
struct CayleyResult {
    #[serde(flatten)]
    triple: ContractionTriple,
    norms: [f64; 3],
    all_contractive: bool,
}

#[derive(Serialize)]
struct SweepResult<'a> {
    report: &'a ObstructionReport,
    phi: Option<f64>,
    first_exceeding: Option<usize>,
    conclusion: Option<String>,
}

#[derive(Serialize)]
struct GalerkinResult {
    basis: GalerkinBasis,
    m: usize,
    adjoint: bool,
    matrix: ComplexMatrix,
    hermitian_margin: f64,
}

fn negative_if(flag: bool) -> i32 {
    if flag {
        0
    } else {
        2
    }
}

/// Execute one parsed command.
pub fn execute(command: &Command) -> Result<(Output, Option<PathBuf>), CliError> {
    let out = match command {
        Command::Range(args) => {
            let t: ComplexMatrix = read_json(&args.input)?;
            let boundary = range_boundary(&t, args.angles)?;
            (
                report("range", args, &args.common, &boundary, Some(boundary.to_csv()), Format::Csv, 0)?,
                &args.common,
            )
        }
        Command::Classify(args) => {
            let o = match read_operand(&args.input)? {
                Operand::Matrix(t) => {
                    let r: SectorReport = classify_operator(&t, args.phi, args.common.tol)?;
                    report(
                        "classify",
                        args,
                        &args.common,
                        &r,
                        None,
                        Format::Json,
                        negative_if(r.class_flags.m_sectorial),
                    )?
                }
                Operand::Relation(theta) => {
                    let tol = args.common.tol;
                    let r = RelationClassification {
                        phi: args.phi,
                        flags: classify_relation(&theta, tol)?,
                        m_sectorial: is_m_sectorial(&theta, args.phi, tol)?,
                        sector_inequality: satisfies_sector_inequality(&theta, args.phi, tol)?,
                    };
                    report("classify", args, &args.common, &r, None, Format::Json, negative_if(r.m_sectorial))?
                }
            };
            (o, &args.common)
        }
        Command::Relation(args) => {
            let mut theta = match (args.from, read_operand(&args.input)?) {
                (RelationSource::Graph, Operand::Matrix(t)) => relation_from_graph(&t)?,
                (RelationSource::Graph, Operand::Relation(r)) => r,
                (RelationSource::Contraction, Operand::Matrix(k)) => relation_from_contraction(&k, args.common.tol)?,
                (RelationSource::Contraction, Operand::Relation(_)) => {
                    return Err(CliError::Usage("--from contraction expects a matrix".into()));
                }
            };
            if let Some(phi) = args.rotate {
                theta = rotate_relation(&theta, phi);
            }
            (bare(&theta, &args.common)?, &args.common)
        }
        Command::Cayley(args) => {
            let theta = read_relation(&args.input)?;
            let triple = cayley_triple(&theta, args.phi)?;
            let (k, v, w) = triple.norms();
            let all = triple.all_contractive(args.common.tol);
            let r = CayleyResult {
                triple,
                norms: [k, v, w],
                all_contractive: all,
            };
            (
                report("cayley", args, &args.common, &r, None, Format::Json, negative_if(all))?,
                &args.common,
            )
        }
        Command::Spectrum(args) => {
            let t: ComplexMatrix = read_json(&args.input)?;
            let o = if args.normal {
                let r = normal_asymptotics_check(&t, args.common.tol)?;
                report("spectrum", args, &args.common, &r, None, Format::Json, 0)?
            } else {
                let r = sector_spectrum_report(&t, args.common.tol)?;
                let exit = negative_if(r.sector_violations == 0);
                report("spectrum", args, &args.common, &r, Some(r.to_csv()), Format::Json, exit)?
            };
            (o, &args.common)
        }
        Command::Factorize(args) => {
            let t: ComplexMatrix = read_json(&args.input)?;
            let r = factorize(&t, args.alpha, args.probes, args.common.seed)?;
            (report("factorize", args, &args.common, &r, None, Format::Json, 0)?, &args.common)
        }
        Command::Schatten(args) => {
            let t: ComplexMatrix = read_json(&args.input)?;
            let r = resolvent_schatten_profile(&t, args.alpha, args.p)?;
            #[derive(Serialize)]
            struct Profile {
                #[serde(serialize_with = "ser_order")]
                p: f64,
                alpha: f64,
                lhs: f64,
                rhs: f64,
            }
            let r = Profile {
                p: r.p,
                alpha: r.alpha,
                lhs: r.lhs,
                rhs: r.rhs,
            };
            (report("schatten", args, &args.common, &r, None, Format::Json, 0)?, &args.common)
        }
        Command::Diffop(DiffopCommand::Sweep(args)) => {
            let prob = build_problem(&args.problem)?;
            let f = read_direction(&args.f, prob.dim())?;
            let r = obstruction_sweep(&prob, &f, args.nmax, args.common.tol)?;
            let result = SweepResult {
                report: &r,
                phi: args.phi,
                first_exceeding: args.phi.and_then(|phi| r.first_exceeding(phi)),
                conclusion: args.phi.map(|phi| r.conclusion(phi)),
            };
            let mut csv = r.to_csv();
            if let Some(c) = &result.conclusion {
                csv = format!("# conclusion: {c}\n{csv}");
            }
            (
                report("diffop sweep", args, &args.common, &result, Some(csv), Format::Csv, 0)?,
                &args.common,
            )
        }
        Command::Diffop(DiffopCommand::Galerkin(args)) => {
            let prob = build_problem(&args.problem)?;
            let m = prob.basis_size;
            let matrix = if args.adjoint {
                galerkin_adjoint_matrix(&prob, GalerkinBasis::Sine, m)
            } else {
                galerkin_matrix(&prob, GalerkinBasis::Sine, m)
            };
            let hermitian_margin = hermitian_eigenvalues(&real_part(&matrix)?, f64::INFINITY)?[0];
            let r = GalerkinResult {
                basis: GalerkinBasis::Sine,
                m,
                adjoint: args.adjoint,
                matrix,
                hermitian_margin,
            };
            (
                report("diffop galerkin", args, &args.common, &r, None, Format::Json, 0)?,
                &args.common,
            )
        }
        Command::Diffop(DiffopCommand::Check(args)) => {
            let prob = build_problem(&args.problem)?;
            let r: AccretivityEquivalence =
                accretivity_equivalence_check(&prob.coefficient, prob.a, prob.b, prob.basis_size, args.common.tol)?;
            let exit = negative_if(r.galerkin_accretive);
            (
                report("diffop check", args, &args.common, &r, None, Format::Json, exit)?,
                &args.common,
            )
        }
        Command::Gen(args) => {
            let seed = args.common.seed;
            let need_phi = || args.phi.ok_or_else(|| CliError::Usage("--phi is required for this kind".into()));
            let o = match args.kind {
                GenKind::Operator => bare(&random_sectorial_operator(args.n, need_phi()?, seed)?, &args.common)?,
                GenKind::Relation => bare(&random_sectorial_relation(args.n, need_phi()?, seed)?, &args.common)?,
                GenKind::Contraction => bare(&random_contraction(args.n, args.touch_unit, &mut seeded(seed)), &args.common)?,
                GenKind::Normal => bare(&random_normal(args.n, &mut seeded(seed)), &args.common)?,
            };
            (o, &args.common)
        }
    };
    Ok((out.0, out.1.out.clone()))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_output(out: &Output, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, &out.body).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                })
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli.command)).and_then(|(out, path)| {
        write_output(&out, path.as_deref())?;
        Ok(out.exit)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
