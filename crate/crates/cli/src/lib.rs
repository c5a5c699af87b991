//! Command-line front end for `bregman-core`.
//!
//! Every invocation is first turned into a [`RunConfig`], either from the
//! command-line flags or from a JSON document given with `--config`, and then
//! executed by [`run`]. Exit codes: 0 success, 1 malformed input or usage,
//! 2 domain and parameter errors, 3 convergence and numerical failures.

pub mod format;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use bregman_core::bregman::{
    bregman_div, project, pythagoras_check_with, ConstraintSet, ProjectionOptions, ProjectionResult, PythagorasReport,
    Side,
};
use bregman_core::geometry::{orthogonality_check, potential_geometry_report, GeometryReport};
use bregman_core::potentials::{check_euler_legendre_with, fenchel_conjugate, grad_conjugate, LegendreReport};
use bregman_core::spectral::{matrix_div, HermitianMatrix, MatrixFamily};
use bregman_core::verify::{run_all, PropertyOutcome};
use bregman_core::{Error, ExtendedReal, Family, Potential, PotentialSpec, Tolerances};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Div,
    Project,
    Conjugate,
    CheckLegendre,
    CheckPythagoras,
    CheckGeometry,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Div => "div",
            Command::Project => "project",
            Command::Conjugate => "conjugate",
            Command::CheckLegendre => "check-legendre",
            Command::CheckPythagoras => "check-pythagoras",
            Command::CheckGeometry => "check-geometry",
            Command::Report => "report",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Command::Div => &["family", "gamma", "alpha", "potential", "matrix_family", "x", "y"],
            Command::Project => &["family", "gamma", "alpha", "potential", "constraint", "y", "side", "trace"],
            Command::Conjugate => &["family", "gamma", "alpha", "potential", "y"],
            Command::CheckLegendre => &["family", "gamma", "alpha", "potential", "dim", "samples"],
            Command::CheckPythagoras => &["family", "gamma", "alpha", "potential", "constraint", "x", "y", "side"],
            Command::CheckGeometry => &["family", "gamma", "alpha", "potential", "x", "constraint", "y"],
            Command::Report => &["samples", "show_config"],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Destination file; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Inputs of a command. Vectors, matrices, constraint sets and potentials are
/// JSON values, or strings holding inline JSON, a file path or (for
/// constraints) a shorthand such as `simplex:1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub trace: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub show_config: bool,
}

impl Inputs {
    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut add = |set: bool, name| {
            if set {
                v.push(name)
            }
        };
        add(self.family.is_some(), "family");
        add(self.gamma.is_some(), "gamma");
        add(self.alpha.is_some(), "alpha");
        add(self.potential.is_some(), "potential");
        add(self.matrix_family.is_some(), "matrix_family");
        add(self.x.is_some(), "x");
        add(self.y.is_some(), "y");
        add(self.constraint.is_some(), "constraint");
        add(self.side.is_some(), "side");
        add(self.trace, "trace");
        add(self.dim.is_some(), "dim");
        add(self.samples.is_some(), "samples");
        add(self.show_config, "show_config");
        v
    }
}

/// A complete, strictly parsed run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn new(command: Command, inputs: Inputs) -> Self {
        RunConfig { command, inputs, tolerances: Tolerances::DEFAULT, seed: 0, output: OutputSpec::default() }
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "bregman", version, about = "Bregman divergences, projections and their geometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CliCommand>,
    /// Run configuration as inline JSON or a file path; replaces the subcommand.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Seed of every random sample (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance overrides as inline JSON or a file path.
    #[arg(long, global = true)]
    pub tolerances: Option<String>,
    /// Write the output document to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// Potential family: neg-entropy, burg, fermi-dirac, exp-sum, gamma-norm, alpha-power.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Potential as JSON `{"family", "params", "dim"}` (inline or file).
    #[arg(long, conflicts_with = "family")]
    potential: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Divergence D(x, y) of vectors, or of Hermitian matrices with --matrix-family.
    Div {
        #[command(flatten)]
        pot: PotentialArgs,
        /// Matrix family: umegaki, logdet, fermi, gammanorm, alpha.
        #[arg(long, conflicts_with_all = ["family", "potential"])]
        matrix_family: Option<String>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Left or right projection of y onto a constraint set.
    Project {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        /// Constraint set as JSON, a file, or simplex:T, sum:T, box:LO:HI.
        #[arg(long)]
        constraint: String,
        #[arg(long)]
        y: String,
        /// Include the solver's per-iteration trace.
        #[arg(long)]
        trace: bool,
    },
    /// Fenchel conjugate value and gradient at y.
    Conjugate {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        y: String,
    },
    /// Euler-Legendre check on sampled points.
    CheckLegendre {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Both sides of the Pythagorean inequality for x in C and y.
    CheckPythagoras {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long, value_enum)]
        side: Option<SideArg>,
        #[arg(long)]
        constraint: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Metric, connections and residuals at x; orthogonality with --constraint and --y.
    CheckGeometry {
        #[command(flatten)]
        pot: PotentialArgs,
        #[arg(long)]
        x: String,
        #[arg(long, requires = "y")]
        constraint: Option<String>,
        #[arg(long, requires = "constraint")]
        y: Option<String>,
    },
    /// Runs every property suite and reports pass/fail per property.
    Report {
        #[arg(long)]
        samples: Option<usize>,
        /// Print the effective numeric configuration instead of running.
        #[arg(long)]
        show_config: bool,
    },
}

fn pot_inputs(p: PotentialArgs) -> Inputs {
    Inputs {
        family: p.family,
        gamma: p.gamma,
        alpha: p.alpha,
        potential: p.potential.map(Value::String),
        ..Inputs::default()
    }
}

impl CliCommand {
    fn into_config(self) -> (Command, Inputs) {
        let s = |v: String| Some(Value::String(v));
        match self {
            CliCommand::Div { pot, matrix_family, x, y } => {
                (Command::Div, Inputs { matrix_family, x: s(x), y: s(y), ..pot_inputs(pot) })
            }
            CliCommand::Project { pot, side, constraint, y, trace } => (
                Command::Project,
                Inputs { side: side.map(Side::from), constraint: s(constraint), y: s(y), trace, ..pot_inputs(pot) },
            ),
            CliCommand::Conjugate { pot, y } => (Command::Conjugate, Inputs { y: s(y), ..pot_inputs(pot) }),
            CliCommand::CheckLegendre { pot, dim, samples } => {
                (Command::CheckLegendre, Inputs { dim, samples, ..pot_inputs(pot) })
            }
            CliCommand::CheckPythagoras { pot, side, constraint, x, y } => (
                Command::CheckPythagoras,
                Inputs { side: side.map(Side::from), constraint: s(constraint), x: s(x), y: s(y), ..pot_inputs(pot) },
            ),
            CliCommand::CheckGeometry { pot, x, constraint, y } => (
                Command::CheckGeometry,
                Inputs {
                    x: s(x),
                    constraint: constraint.map(Value::String),
                    y: y.map(Value::String),
                    ..pot_inputs(pot)
                },
            ),
            CliCommand::Report { samples, show_config } => {
                (Command::Report, Inputs { samples, show_config, ..Inputs::default() })
            }
        }
    }
}

impl Cli {
    /// Builds the run configuration; flags given next to `--config` override it.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let mut config = match (self.config, self.command) {
            (Some(_), Some(_)) => return Err(CliError::Usage("--config cannot be combined with a subcommand".into())),
            (None, None) => return Err(CliError::Usage("a subcommand or --config is required (see --help)".into())),
            (Some(src), None) => load::<RunConfig>(&Value::String(src), "config")?,
            (None, Some(cmd)) => {
                let (command, inputs) = cmd.into_config();
                RunConfig::new(command, inputs)
            }
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(t) = self.tolerances {
            config.tolerances = load::<Tolerances>(&Value::String(t), "tolerances")?;
        }
        if let Some(path) = self.output {
            config.output.path = Some(path);
        }
        if let Some(f) = self.format {
            config.output.format = f;
        }
        Ok(config)
    }
}

// ---------------------------------------------------------------------------
// Errors

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Io(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Convergence { .. } | Error::Numeric(_) => 3,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "malformed input: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(Error::Convergence { iterations, residual, best }) => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e}); best iterate {best:?}")
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

// ---------------------------------------------------------------------------
// Input resolution

fn looks_inline(s: &str) -> bool {
    let t = s.trim_start();
    t.starts_with(['[', '{', '"', '-', '.']) || t.starts_with(|c: char| c.is_ascii_digit())
}

/// Reads `v` as a `T`: JSON values directly, strings as inline JSON or as a
/// path to a JSON file. Syntax errors carry line and column.
pub fn load<T: DeserializeOwned>(v: &Value, what: &str) -> Result<T, CliError> {
    match v {
        Value::String(s) if looks_inline(s) => {
            serde_json::from_str(s).map_err(|e| CliError::Input(format!("{what}: {e}")))
        }
        Value::String(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {what} file '{path}': {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what} ({path}): {e}")))
        }
        other => serde_json::from_value(other.clone()).map_err(|e| CliError::Input(format!("{what}: {e}"))),
    }
}

fn required<'a>(v: &'a Option<Value>, name: &str) -> Result<&'a Value, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("input '{name}' is required")))
}

fn vector(v: &Option<Value>, name: &str) -> Result<Vec<f64>, CliError> {
    load(required(v, name)?, name)
}

fn parse_num(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Input(format!("constraint: '{s}' is not a number in {what}")))
}

/// Constraint set from JSON or one of the shorthands `simplex:T`, `sum:T`,
/// `box:LO:HI` (dimension taken from `dim`).
pub fn constraint(v: &Value, dim: usize) -> Result<ConstraintSet, CliError> {
    if let Value::String(s) = v {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["simplex", t] => return Ok(ConstraintSet::simplex(parse_num(t, s)?, dim)?),
            ["sum", t] => return Ok(ConstraintSet::sum(parse_num(t, s)?, dim)?),
            ["box", lo, hi] => {
                let (lo, hi) = (parse_num(lo, s)?, parse_num(hi, s)?);
                return Ok(ConstraintSet::boxed(vec![lo; dim], vec![hi; dim])?);
            }
            [kind @ ("simplex" | "sum" | "box"), ..] => {
                return Err(CliError::Input(format!("constraint shorthand '{s}' has the wrong shape for '{kind}'")))
            }
            _ => {}
        }
    }
    load(v, "constraint")
}

fn family_by_name(inputs: &Inputs, name: &str) -> Result<Family, CliError> {
    let (needs_gamma, needs_alpha) = (name == "gamma-norm", name == "alpha-power");
    if inputs.gamma.is_some() && !needs_gamma || inputs.alpha.is_some() && !needs_alpha {
        return Err(CliError::Usage(format!("family '{name}' takes no such parameter")));
    }
    let need = |v: Option<f64>, p: &str| v.ok_or_else(|| CliError::Usage(format!("family '{name}' needs --{p}")));
    Ok(match name {
        "neg-entropy" => Family::NegEntropy,
        "burg" => Family::Burg,
        "fermi-dirac" => Family::FermiDirac,
        "exp-sum" => Family::ExpSum,
        "gamma-norm" => Family::GammaNorm { gamma: need(inputs.gamma, "gamma")? },
        "alpha-power" => Family::AlphaPower { alpha: need(inputs.alpha, "alpha")? },
        other => {
            return Err(CliError::Usage(format!(
                "unknown family '{other}' (norm-integral potentials are given with --potential)"
            )))
        }
    })
}

/// Potential from `family` (+ `gamma`/`alpha`) in dimension `dim`, or from
/// a `potential` document whose dimension must equal `dim` when given.
fn potential(inputs: &Inputs, dim: Option<usize>) -> Result<PotentialSpec, CliError> {
    match (&inputs.family, &inputs.potential) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either family or potential, not both".into())),
        (None, None) => Err(CliError::Usage("one of family or potential is required".into())),
        (None, Some(v)) => {
            if inputs.gamma.is_some() || inputs.alpha.is_some() {
                return Err(CliError::Usage("gamma and alpha go inside the potential document".into()));
            }
            let spec: PotentialSpec = load(v, "potential")?;
            match dim {
                Some(n) if n != spec.dim() => Err(Error::DimensionMismatch { expected: spec.dim(), found: n }.into()),
                _ => Ok(spec),
            }
        }
        (Some(name), None) => {
            let family = family_by_name(inputs, name)?;
            let n = dim.ok_or_else(|| CliError::Usage("dimension unknown".into()))?;
            Ok(PotentialSpec::new(family, n)?)
        }
    }
}

fn matrix_family(inputs: &Inputs, name: &str) -> Result<MatrixFamily, CliError> {
    let (needs_gamma, needs_alpha) = (name == "gammanorm", name == "alpha");
    if inputs.gamma.is_some() && !needs_gamma || inputs.alpha.is_some() && !needs_alpha {
        return Err(CliError::Usage(format!("matrix family '{name}' takes no such parameter")));
    }
    let need =
        |v: Option<f64>, p: &str| v.ok_or_else(|| CliError::Usage(format!("matrix family '{name}' needs --{p}")));
    let fam = match name {
        "umegaki" => MatrixFamily::Umegaki,
        "logdet" => MatrixFamily::LogDet,
        "fermi" => MatrixFamily::Fermi,
        "gammanorm" => MatrixFamily::GammaNorm { gamma: need(inputs.gamma, "gamma")? },
        "alpha" => MatrixFamily::Alpha { alpha: need(inputs.alpha, "alpha")? },
        other => return Err(CliError::Usage(format!("unknown matrix family '{other}'"))),
    };
    fam.validate()?;
    Ok(fam)
}

/// The divergence is `+inf` for a second argument off the interior of the
/// domain; the command reports that case as a domain error instead.
fn require_interior(spec: &PotentialSpec, y: &[f64], what: &str) -> Result<(), CliError> {
    if spec.dim() == y.len() && !spec.in_interior(y) {
        return Err(Error::Domain(format!("{what} must lie in the interior of the domain")).into());
    }
    Ok(())
}

/// Hermitian matrix from `{"re", "im"}` or a nested array of reals.
fn matrix(v: &Option<Value>, name: &str) -> Result<HermitianMatrix, CliError> {
    let raw: Value = load(required(v, name)?, name)?;
    let raw = if raw.is_array() { serde_json::json!({ "re": raw }) } else { raw };
    load(&raw, name)
}

// ---------------------------------------------------------------------------
// Output documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivOutput {
    pub value: ExtendedReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateOutput {
    pub value: ExtendedReal,
    /// `grad Phi*(y)`, present when the value is finite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryOutput {
    #[serde(flatten)]
    pub report: GeometryReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orthogonality_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOutput {
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub properties: Vec<PropertyOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOutput {
    pub tolerances: Tolerances,
    pub seed: u64,
    pub samples: usize,
    pub legendre_samples: usize,
    pub legendre_dim: usize,
}

pub const DEFAULT_REPORT_SAMPLES: usize = 20;
pub const DEFAULT_LEGENDRE_SAMPLES: usize = 200;
pub const DEFAULT_LEGENDRE_DIM: usize = 2;

/// Result of [`run`]: exit code, output document (on success) and
/// diagnostics for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub document: Option<String>,
    pub diagnostics: Option<String>,
}

fn to_value<T: Serialize>(doc: &T) -> Value {
    serde_json::to_value(doc).expect("output documents serialize")
}

fn execute(config: &RunConfig) -> Result<(Value, Option<&'static str>), CliError> {
    let inputs = &config.inputs;
    let cmd = config.command;
    if let Some(extra) = inputs.present().into_iter().find(|f| !cmd.allowed().contains(f)) {
        return Err(CliError::Usage(format!("input '{extra}' is not used by command {}", cmd.name())));
    }
    let tol = config.tolerances;
    let opts = |trace| ProjectionOptions { tolerances: tol, initial: None, trace };
    let doc = match cmd {
        Command::Div => match &inputs.matrix_family {
            Some(name) => {
                let fam = matrix_family(inputs, name)?;
                let (x, y) = (matrix(&inputs.x, "x")?, matrix(&inputs.y, "y")?);
                let spectrum: Vec<f64> = y.eigen()?.eigenvalues.iter().copied().collect();
                require_interior(&fam.potential(y.dim())?, &spectrum, "spectrum of y")?;
                to_value(&DivOutput { value: matrix_div(fam, &x, &y)? })
            }
            None => {
                let (x, y) = (vector(&inputs.x, "x")?, vector(&inputs.y, "y")?);
                let spec = potential(inputs, Some(x.len()))?;
                require_interior(&spec, &y, "y")?;
                to_value(&DivOutput { value: bregman_div(&spec, &x, &y)? })
            }
        },
        Command::Project => {
            let y = vector(&inputs.y, "y")?;
            let spec = potential(inputs, Some(y.len()))?;
            let c = constraint(required(&inputs.constraint, "constraint")?, y.len())?;
            let side = inputs.side.unwrap_or(Side::Left);
            let res: ProjectionResult = project(&spec, &c, &y, side, &opts(inputs.trace))?;
            to_value(&res)
        }
        Command::Conjugate => {
            let y = vector(&inputs.y, "y")?;
            let spec = potential(inputs, Some(y.len()))?;
            let value = fenchel_conjugate(&spec, &y)?;
            let gradient = if value.is_finite() { Some(grad_conjugate(&spec, &y)?) } else { None };
            to_value(&ConjugateOutput { value, gradient })
        }
        Command::CheckLegendre => {
            let dim = match (inputs.dim, &inputs.potential) {
                (Some(n), _) => Some(n),
                (None, Some(_)) => None,
                (None, None) => Some(DEFAULT_LEGENDRE_DIM),
            };
            let spec = potential(inputs, dim)?;
            let samples = inputs.samples.unwrap_or(DEFAULT_LEGENDRE_SAMPLES);
            let rep: LegendreReport = check_euler_legendre_with(&spec, samples, config.seed, &tol)?;
            to_value(&rep)
        }
        Command::CheckPythagoras => {
            let (x, y) = (vector(&inputs.x, "x")?, vector(&inputs.y, "y")?);
            let spec = potential(inputs, Some(y.len()))?;
            let c = constraint(required(&inputs.constraint, "constraint")?, y.len())?;
            let side = inputs.side.unwrap_or(Side::Left);
            let rep: PythagorasReport = pythagoras_check_with(&spec, &c, &x, &y, side, &opts(false))?;
            to_value(&rep)
        }
        Command::CheckGeometry => {
            let x = vector(&inputs.x, "x")?;
            let spec = potential(inputs, Some(x.len()))?;
            let report = potential_geometry_report(&spec, &x, config.seed)?;
            let orthogonality_residual = match (&inputs.constraint, &inputs.y) {
                (Some(c), Some(_)) => {
                    let y = vector(&inputs.y, "y")?;
                    Some(orthogonality_check(&spec, &constraint(c, y.len())?, &y)?)
                }
                (None, None) => None,
                _ => return Err(CliError::Usage("constraint and y must be given together".into())),
            };
            to_value(&GeometryOutput { report, orthogonality_residual })
        }
        Command::Report => {
            let samples = inputs.samples.unwrap_or(DEFAULT_REPORT_SAMPLES);
            if samples == 0 {
                return Err(CliError::Usage("samples must be at least 1".into()));
            }
            if inputs.show_config {
                to_value(&ConfigOutput {
                    tolerances: tol,
                    seed: config.seed,
                    samples,
                    legendre_samples: DEFAULT_LEGENDRE_SAMPLES,
                    legendre_dim: DEFAULT_LEGENDRE_DIM,
                })
            } else {
                let properties = run_all(config.seed, samples, &tol);
                let passed = properties.iter().all(|p| p.passed);
                return Ok((
                    to_value(&ReportOutput { seed: config.seed, samples, passed, properties }),
                    Some("properties"),
                ));
            }
        }
    };
    Ok((doc, None))
}

/// Executes `config` without touching the file system for output.
pub fn run(config: &RunConfig) -> Outcome {
    let rendered = execute(config).and_then(|(doc, rows)| match config.output.format {
        Format::Json => Ok(format::to_json(&doc)),
        Format::Csv => format::to_csv(&doc, rows).map_err(|e| CliError::Io(e.to_string())),
    });
    match rendered {
        Ok(document) => Outcome { code: 0, document: Some(document), diagnostics: None },
        Err(e) => Outcome { code: e.exit_code(), document: None, diagnostics: Some(format!("bregman: {e}")) },
    }
}

/// Full command-line entry point: parses `args`, runs, writes the document
/// to its destination and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    let config = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bregman: {e}");
            return e.exit_code();
        }
    };
    let outcome = run(&config);
    if let Some(d) = &outcome.diagnostics {
        eprintln!("{d}");
    }
    if let Some(doc) = &outcome.document {
        let written = match &config.output.path {
            Some(path) => std::fs::write(path, doc).map_err(|e| format!("cannot write '{}': {e}", path.display())),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(doc.as_bytes()).map_err(|e| e.to_string())
            }
        };
        if let Err(e) = written {
            eprintln!("bregman: i/o error: {e}");
            return 1;
        }
    }
    outcome.code
}
