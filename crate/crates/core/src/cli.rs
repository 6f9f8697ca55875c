//! Command-line front end. All reports are JSON on stdout.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{curvature_at_with, invariant_checks, CurvatureOptions, InvariantCheck};
use crate::families::{BuiltFamily, FamilyConfig, FamilySpec, Thm14Classification};
use crate::linalg::{spectral_profile, SpectralProfile, SquareMatrix, DEFAULT_RANK_TOL};
use crate::models::{
    canonical_model, double_model, einstein_constant, model_from_curvature, random_model, validate, Model,
    ModelDocument, ModelError, SymmetryReport, MODEL_SYMMETRY_TOL,
};
use crate::sampling::{grid_points, sample_points};
use crate::suite::{run_suite, SuiteConfig, SuiteReport};
use crate::videv::{
    check_einstein, check_jacobi_tsankov, check_jacobi_videv, check_mixed_tsankov, check_pseudo_einstein,
    check_skew_videv, CheckError, PropertyEntry, Tolerances,
};

pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EVALUATION: i32 = 3;
pub const EXIT_INDETERMINATE: i32 = 4;
pub const EXIT_NOT_EINSTEIN: i32 = 5;

/// Points sampled per chart when neither the config nor `--points` gives any.
pub const DEFAULT_POINT_COUNT: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Curvature analysis of pseudo-Riemannian metrics and curvature models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonFlags {
    /// Pass tolerance for scale-normalized residuals.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Relative rank threshold for spectral profiles.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Indented JSON (or a table, for `suite`).
    #[arg(long)]
    pub pretty: bool,
}

impl CommonFlags {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances::with_pass(self.tol)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a family config at sample points.
    Analyze {
        config: PathBuf,
        /// Inline JSON list of points, or `grid:N` for N points per axis in [-1,1]^m.
        #[arg(long)]
        points: Option<String>,
        /// Skip ∇R, except for families with claims about it (def11, thm19).
        #[arg(long)]
        lazy_nabla_r: bool,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Algebraic curvature models.
    Model {
        #[command(subcommand)]
        action: ModelCommand,
    },
    /// Run the reproduction suite.
    Suite {
        /// Only criteria whose key contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        common: CommonFlags,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Check the curvature symmetries of a model file.
    Validate {
        model: PathBuf,
        #[arg(long, default_value_t = MODEL_SYMMETRY_TOL)]
        tol: f64,
        #[arg(long)]
        pretty: bool,
    },
    /// Double an Einstein Riemannian model written in an orthonormal basis.
    Double {
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        pretty: bool,
    },
    /// Seeded random model.
    Random {
        #[arg(long)]
        n: usize,
        /// Number of negative directions in the inner product.
        #[arg(long, default_value_t = 0)]
        neg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Constant-curvature model `c(⟨x,w⟩⟨y,z⟩ − ⟨x,z⟩⟨y,w⟩)` on `(-1)^neg ⊕ (+1)^(n-neg)`.
    Canonical {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        neg: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// An error with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl fmt::Display) -> Self {
        CliError { code: EXIT_CONFIG, message: message.to_string() }
    }

    fn evaluation(message: impl fmt::Display) -> Self {
        CliError { code: EXIT_EVALUATION, message: message.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Result of a command: the document to print and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
    /// One-line note for stderr, if any.
    pub note: Option<String>,
}

/// A measured number with the bound it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub tol: f64,
    pub scale: f64,
    pub ok: bool,
}

impl Measured {
    /// `value ≤ tol·scale`.
    pub fn new(value: f64, tol: f64, scale: f64) -> Self {
        Measured { value, tol, scale, ok: value <= tol * scale }
    }
}

/// A property verdict, or the residual that fell between the bands.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PropertyOutcome {
    Decided(PropertyEntry),
    Indeterminate { indeterminate: bool, residual: f64, pass: f64, fail_floor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub invariants: Vec<InvariantCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_nabla_r: Option<Measured>,
    pub properties: std::collections::BTreeMap<String, PropertyOutcome>,
    pub spectral_profile: SpectralProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_squared_plus_s2_residual: Option<Measured>,
}

impl PointReport {
    fn indeterminate(&self) -> impl Iterator<Item = &str> {
        self.properties
            .iter()
            .filter(|(_, v)| matches!(v, PropertyOutcome::Indeterminate { .. }))
            .map(|(k, _)| k.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub family: &'static str,
    pub dim: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub rank_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm14: Option<Thm14Classification>,
    pub points: Vec<PointReport>,
    pub indeterminate: usize,
}

fn outcome(property: &str, r: Result<PropertyEntry, CheckError>) -> Result<PropertyOutcome, CliError> {
    match r {
        Ok(e) => Ok(PropertyOutcome::Decided(e)),
        Err(CheckError::Indeterminate { residual, pass, fail_floor, .. }) => {
            Ok(PropertyOutcome::Indeterminate { indeterminate: true, residual, pass, fail_floor })
        }
        Err(e) => Err(CliError::evaluation(format!("{property}: {e}"))),
    }
}

fn properties(
    model: &Model,
    profile: &SpectralProfile,
    tol: &Tolerances,
) -> Result<std::collections::BTreeMap<String, PropertyOutcome>, CliError> {
    let rho = model.ricci_operator();
    let mut out = std::collections::BTreeMap::new();
    let checks: [(&str, Result<PropertyEntry, CheckError>); 6] = [
        ("einstein", check_einstein(&rho, tol)),
        ("pseudo_einstein", check_pseudo_einstein(profile, tol)),
        ("jacobi_videv", check_jacobi_videv(model, tol)),
        ("skew_videv", check_skew_videv(model, tol)),
        ("jacobi_tsankov", check_jacobi_tsankov(model, tol)),
        ("mixed_tsankov", check_mixed_tsankov(model, tol)),
    ];
    for (name, r) in checks {
        out.insert(name.to_string(), outcome(name, r)?);
    }
    Ok(out)
}

/// Parse `--points`: a JSON list of points or `grid:N`.
pub fn parse_points(spec: &str, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let points = if let Some(n) = spec.strip_prefix("grid:") {
        let n: usize = n.trim().parse().map_err(|_| CliError::config(format!("bad grid size in {spec:?}")))?;
        if n == 0 || n.checked_pow(dim as u32).is_none_or(|t| t > 100_000) {
            return Err(CliError::config(format!("grid {n}^{dim} is empty or too large")));
        }
        grid_points(&vec![(-1.0, 1.0); dim], n)
    } else {
        serde_json::from_str::<Vec<Vec<f64>>>(spec).map_err(|e| CliError::config(format!("--points: {e}")))?
    };
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(CliError::config(format!("point {p:?} has {} coordinates, expected {dim}", p.len())));
    }
    Ok(points)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::evaluation(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    text.expect("reports serialize")
}

fn analyze_point(
    built: &BuiltFamily,
    spec: &FamilySpec,
    p: &[f64],
    nabla_r: bool,
    tol: &Tolerances,
    rank_tol: f64,
) -> Result<PointReport, CliError> {
    let cd = curvature_at_with(&built.chart, p, CurvatureOptions { nabla_r })
        .map_err(|e| CliError::evaluation(format!("at {p:?}: {e}")))?;
    let model = model_from_curvature(&cd).map_err(|e| CliError::evaluation(format!("at {p:?}: {e}")))?;
    let profile = spectral_profile(&cd.ricci_op, rank_tol);
    let rho_sq = match spec {
        FamilySpec::Thm19 { s } => {
            let r = (&cd.ricci_op * &cd.ricci_op).add(&SquareMatrix::identity(cd.dim).scale(s * s)).max_abs();
            Some(Measured::new(r, 1e-9, 1.0))
        }
        _ => None,
    };
    Ok(PointReport {
        point: p.to_vec(),
        invariants: invariant_checks(&cd),
        max_abs_nabla_r: cd.max_abs_nabla_r().map(|v| Measured::new(v, 1e-9, cd.scale())),
        properties: properties(&model, &profile, tol)?,
        spectral_profile: profile,
        rho_squared_plus_s2_residual: rho_sq,
    })
}

pub fn cmd_analyze(
    config: &Path,
    points: Option<&str>,
    lazy_nabla_r: bool,
    common: &CommonFlags,
) -> Result<Outcome, CliError> {
    let cfg = FamilyConfig::from_json(&read(config)?).map_err(CliError::config)?;
    let built = cfg.build().map_err(CliError::config)?;
    let dim = built.chart.dim();
    let pts = match (points, &cfg.points) {
        (Some(spec), _) => parse_points(spec, dim)?,
        (None, Some(p)) => {
            if let Some(bad) = p.iter().find(|p| p.len() != dim) {
                return Err(CliError::config(format!("point {bad:?} has wrong dimension")));
            }
            p.clone()
        }
        (None, None) => sample_points(&built.chart, &vec![(-1.0, 1.0); dim], DEFAULT_POINT_COUNT, common.seed)
            .map_err(CliError::evaluation)?,
    };
    let nabla_r = !lazy_nabla_r || matches!(cfg.spec, FamilySpec::Def11 { .. } | FamilySpec::Thm19 { .. });
    let tol = common.tolerances();
    let reports: Vec<PointReport> = pts
        .par_iter()
        .map(|p| analyze_point(&built, &cfg.spec, p, nabla_r, &tol, common.rank_tol))
        .collect::<Result<_, _>>()?;
    let indeterminate: Vec<String> =
        reports.iter().flat_map(|r| r.indeterminate().map(|k| format!("{k} at {:?}", r.point))).collect();
    let report = AnalyzeReport {
        family: built.name,
        dim,
        seed: common.seed,
        tolerances: tol,
        rank_tol: common.rank_tol,
        thm14: built.thm14,
        indeterminate: indeterminate.len(),
        points: reports,
    };
    let (code, note) = match indeterminate.first() {
        Some(first) => (EXIT_INDETERMINATE, Some(format!("indeterminate verdict: {first}"))),
        None => (0, None),
    };
    Ok(Outcome { stdout: to_json(&report, common.pretty), code, note })
}

fn load_model_document(path: &Path) -> Result<ModelDocument, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateReport {
    pub valid: bool,
    #[serde(flatten)]
    pub symmetries: SymmetryReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleReport {
    pub output: String,
    pub n: usize,
    pub einstein_constant: f64,
    pub signature: (usize, usize),
    pub rho1_sq_plus_4s2_residual: Measured,
}

pub fn cmd_model(action: &ModelCommand) -> Result<Outcome, CliError> {
    match action {
        ModelCommand::Validate { model, tol, pretty } => {
            let doc = load_model_document(model)?;
            if doc.a.len() != doc.n.pow(4) {
                return Err(CliError::config(format!("A has {} entries, expected {}", doc.a.len(), doc.n.pow(4))));
            }
            let symmetries = validate(doc.n, &doc.a, *tol);
            let report = ValidateReport { valid: symmetries.is_valid(), symmetries };
            Ok(Outcome { stdout: to_json(&report, *pretty), code: 0, note: None })
        }
        ModelCommand::Double { model, out, pretty } => {
            let doc = load_model_document(model)?;
            let m0 = Model::from_document(&doc).map_err(CliError::config)?;
            let m1 = double_model(&m0).map_err(|e| match e {
                ModelError::NotEinstein { .. } => CliError { code: EXIT_NOT_EINSTEIN, message: e.to_string() },
                other => CliError::config(other),
            })?;
            let s = einstein_constant(&m0).map_err(CliError::evaluation)?;
            let rho = m1.ricci_operator();
            let n1 = m1.dim();
            let residual = (&rho * &rho).add(&SquareMatrix::identity(n1).scale(4.0 * s * s)).max_abs();
            write(out, &to_json(&m1.to_document(), false))?;
            let report = DoubleReport {
                output: out.display().to_string(),
                n: doc.n,
                einstein_constant: s,
                signature: m1.signature(),
                rho1_sq_plus_4s2_residual: Measured::new(residual, 1e-9, 1.0 + 4.0 * s * s),
            };
            Ok(Outcome { stdout: to_json(&report, *pretty), code: 0, note: None })
        }
        ModelCommand::Random { n, neg, seed, out } => {
            let m = random_model(*seed, *n, *neg).map_err(CliError::config)?;
            emit_model(&m, out.as_deref())
        }
        ModelCommand::Canonical { n, c, neg, out } => {
            if *n == 0 || neg > n {
                return Err(CliError::config(format!("need 0 ≤ neg ≤ n and n ≥ 1 (got n = {n}, neg = {neg})")));
            }
            let metric = crate::models::signature_metric(*neg, n - neg);
            let m = canonical_model(&metric, *c).map_err(CliError::config)?;
            emit_model(&m, out.as_deref())
        }
    }
}

fn emit_model(m: &Model, out: Option<&Path>) -> Result<Outcome, CliError> {
    let text = to_json(&m.to_document(), false);
    match out {
        Some(path) => {
            write(path, &text)?;
            Ok(Outcome { stdout: String::new(), code: 0, note: Some(format!("wrote {}", path.display())) })
        }
        None => Ok(Outcome { stdout: text, code: 0, note: None }),
    }
}

/// Plain-text table of a suite run.
pub fn suite_table(report: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        out.push_str(&c.summary_line());
        out.push('\n');
        for check in c.failed_checks() {
            out.push_str(&format!("       {}: {}\n", check.name, check.detail));
        }
    }
    out.push_str(&format!(
        "{} criteria, {} passed, {:.2} s\n",
        report.criteria.len(),
        report.criteria.iter().filter(|c| c.passed).count(),
        report.seconds
    ));
    out
}

pub fn cmd_suite(filter: Option<&str>, common: &CommonFlags) -> Result<Outcome, CliError> {
    let cfg = SuiteConfig { tol: common.tolerances(), seed: common.seed, rank_tol: common.rank_tol };
    let report = run_suite(&cfg, filter);
    if report.criteria.is_empty() {
        return Err(CliError::config(format!("no criterion matches {:?}", filter.unwrap_or(""))));
    }
    let stdout = if common.pretty { suite_table(&report) } else { to_json(&report, false) };
    let failing: Vec<String> =
        report.criteria.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.key, c.id)).collect();
    let (code, note) = if failing.is_empty() {
        (0, None)
    } else {
        (EXIT_SUITE_FAILURE, Some(format!("failing criteria: {}", failing.join(", "))))
    };
    Ok(Outcome { stdout, code, note })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze { config, points, lazy_nabla_r, common } => {
            cmd_analyze(config, points.as_deref(), *lazy_nabla_r, common)
        }
        Command::Model { action } => cmd_model(action),
        Command::Suite { filter, common } => cmd_suite(filter.as_deref(), common),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_points_and_grids() {
        assert_eq!(parse_points("[[0,1],[2,3]]", 2).unwrap(), vec![vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(parse_points("grid:3", 2).unwrap().len(), 9);
        assert_eq!(parse_points("[[0,1,2]]", 2).unwrap_err().code, EXIT_CONFIG);
        assert_eq!(parse_points("grid:x", 2).unwrap_err().code, EXIT_CONFIG);
        assert_eq!(parse_points("grid:0", 2).unwrap_err().code, EXIT_CONFIG);
        assert_eq!(parse_points("not json", 2).unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn measured_compares_against_scaled_tolerance() {
        assert!(Measured::new(4e-9, 1e-9, 5.0).ok);
        assert!(!Measured::new(6e-9, 1e-9, 5.0).ok);
    }

    #[test]
    fn indeterminate_is_reported_not_raised() {
        let err = CheckError::Indeterminate { property: "p".into(), residual: 1e-6, pass: 1e-8, fail_floor: 1e-4 };
        let out = outcome("p", Err(err)).unwrap();
        assert!(matches!(out, PropertyOutcome::Indeterminate { residual, .. } if residual == 1e-6));
        let json = serde_json::to_string(&out).unwrap();
        assert!(json.contains("\"indeterminate\":true"));
        assert_eq!(outcome("p", Err(CheckError::NotSelfAdjoint(1.0))).unwrap_err().code, EXIT_EVALUATION);
    }

    #[test]
    fn command_line_parses() {
        let cli = Cli::try_parse_from(["curvlab", "suite", "--filter", "thm14", "--tol", "1e-7"]).unwrap();
        match cli.command {
            Command::Suite { filter, common } => {
                assert_eq!(filter.as_deref(), Some("thm14"));
                assert_eq!(common.tolerances().pass, 1e-7);
            }
            _ => panic!("wrong command"),
        }
        let cli = Cli::try_parse_from(["curvlab", "model", "canonical", "--n", "3", "--c", "-1"]).unwrap();
        assert!(matches!(cli.command, Command::Model { action: ModelCommand::Canonical { n: 3, .. } }));
    }
}
