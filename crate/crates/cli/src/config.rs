//! Flag and file configuration, merged and validated into a [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualgap::solver::SolveOptions;
use dualgap::Degree;
use serde::Deserialize;

use crate::expr::{parse_expr, Expr};
use crate::ConfigError;

#[derive(Debug, Parser)]
#[command(
    name = "dualgap",
    version,
    about = "Duality-gap error decomposition under coefficient uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    Solve,
    Bounds,
    Convergence,
    Manufactured,
    LinearCheck,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the primal and dual problems and print the gap breakdown.
    Solve(Flags),
    /// Indeterminacy bounds for solved (or, with --u, interpolated) pairs.
    Bounds(Flags),
    /// Solve-mode convergence study over meshes and epsilons.
    Convergence(Flags),
    /// Interpolate-mode study for a manufactured solution --u.
    Manufactured(Flags),
    /// Residuals of the linear error identities (p = 2).
    LinearCheck(Flags),
}

impl Command {
    pub fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Solve(f) => (CommandKind::Solve, f),
            Command::Bounds(f) => (CommandKind::Bounds, f),
            Command::Convergence(f) => (CommandKind::Convergence, f),
            Command::Manufactured(f) => (CommandKind::Manufactured, f),
            Command::LinearCheck(f) => (CommandKind::LinearCheck, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Reaction exponent, 1 < p <= 2.
    #[arg(long)]
    pub p: Option<f64>,
    /// Mean reaction coefficient as an expression in x.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma0: Option<String>,
    /// Load as an expression in x.
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Manufactured solution; the load is derived from it.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Domain endpoints `a,b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub domain: Vec<f64>,
    /// Polynomial degrees (1 or 2).
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// Element counts, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    pub elements: Vec<usize>,
    /// Uncertainty radii.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    /// Gauss-Legendre points per element.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Relative gradient tolerance for BFGS.
    #[arg(long)]
    pub tol: Option<f64>,
    /// BFGS iteration limit.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// SVG plot path; a `-ratios.svg` companion is written next to it.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Key = value configuration file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn into_text(self) -> String {
        match self {
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(v) => format!("{v:?}"),
            Scalar::Text(s) => s,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    p: Option<f64>,
    gamma0: Option<Scalar>,
    f: Option<Scalar>,
    u: Option<String>,
    domain: Option<Vec<f64>>,
    degree: Option<OneOrMany<usize>>,
    elements: Option<OneOrMany<usize>>,
    epsilon: Option<OneOrMany<f64>>,
    quad_order: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    output: Option<PathBuf>,
    format: Option<Format>,
    plot: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

fn parse_named(name: &str, text: &str) -> Result<Expr, ConfigError> {
    parse_expr(text).map_err(|e| ConfigError(format!("--{name} `{text}`: {e}")))
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub p: f64,
    pub gamma0: Expr,
    pub f: Option<Expr>,
    pub u: Option<Expr>,
    pub domain: (f64, f64),
    pub degrees: Vec<Degree>,
    pub elements: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub quad_points: usize,
    pub solve: SolveOptions,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub plot: Option<PathBuf>,
}

pub const DEFAULT_ELEMENTS: [usize; 4] = [8, 16, 32, 64];
pub const DEFAULT_EPSILONS: [f64; 3] = [0.005, 0.01, 0.05];

impl RunConfig {
    /// Merges `flags` over the optional config file and checks everything
    /// that can be checked without computing.
    pub fn resolve(kind: CommandKind, flags: Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let p = flags.p.or(file.p).unwrap_or(2.0);
        if !(p > 1.0 && p <= 2.0) {
            return Err(ConfigError(format!("--p must satisfy 1 < p <= 2, got {p}")));
        }
        let gamma0_text = flags
            .gamma0
            .or(file.gamma0.map(Scalar::into_text))
            .unwrap_or_else(|| "1".into());
        let gamma0 = parse_named("gamma0", &gamma0_text)?;
        let f = flags
            .f
            .or(file.f.map(Scalar::into_text))
            .map(|t| parse_named("f", &t))
            .transpose()?;
        let u = flags
            .u
            .or(file.u)
            .map(|t| parse_named("u", &t))
            .transpose()?;
        match (kind, &f, &u) {
            (_, Some(_), Some(_)) => {
                return Err(ConfigError("give either --f or --u, not both".into()))
            }
            (CommandKind::Manufactured, _, None) => {
                return Err(ConfigError("manufactured needs --u".into()))
            }
            (
                CommandKind::Solve
                | CommandKind::Bounds
                | CommandKind::Convergence
                | CommandKind::LinearCheck,
                None,
                None,
            ) => {
                return Err(ConfigError(
                    "give a load --f or a manufactured solution --u".into(),
                ))
            }
            _ => {}
        }

        let domain = nonempty(flags.domain)
            .or(file.domain)
            .unwrap_or(vec![0.0, 1.0]);
        let domain = match domain.as_slice() {
            [a, b] if a.is_finite() && b.is_finite() && a < b => (*a, *b),
            _ => {
                return Err(ConfigError(format!(
                    "--domain must be `a,b` with a < b, got {domain:?}"
                )))
            }
        };

        let default_degree = if kind == CommandKind::LinearCheck {
            vec![1, 2]
        } else {
            vec![1]
        };
        let degrees = nonempty(flags.degree)
            .or(file.degree.map(OneOrMany::into_vec))
            .unwrap_or(default_degree)
            .into_iter()
            .map(|k| {
                Degree::from_order(k)
                    .map_err(|_| ConfigError(format!("--degree must be 1 or 2, got {k}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let elements = nonempty(flags.elements)
            .or(file.elements.map(OneOrMany::into_vec))
            .unwrap_or(DEFAULT_ELEMENTS.to_vec());
        if elements.is_empty() || elements[0] == 0 || elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError(format!(
                "--elements must be positive and strictly increasing, got {elements:?}"
            )));
        }
        let epsilons = nonempty(flags.epsilon)
            .or(file.epsilon.map(OneOrMany::into_vec))
            .unwrap_or(DEFAULT_EPSILONS.to_vec());
        if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(ConfigError(format!(
                "--epsilon values must be positive, got {epsilons:?}"
            )));
        }

        let quad_points = flags
            .quad_order
            .or(file.quad_order)
            .unwrap_or(dualgap::quadrature::DEFAULT_POINTS);
        let mut solve = SolveOptions::default();
        if let Some(t) = flags.tol.or(file.tol) {
            solve.grad_tolerance = t;
        }
        if let Some(m) = flags.max_iter.or(file.max_iter) {
            solve.max_iterations = m;
        }
        solve.validate().map_err(|e| ConfigError(e.to_string()))?;

        let default_format = match kind {
            CommandKind::Convergence | CommandKind::Manufactured => Format::Csv,
            _ => Format::Json,
        };
        let plot = flags.plot.or(file.plot);
        if plot.is_some() && !matches!(kind, CommandKind::Convergence | CommandKind::Manufactured) {
            return Err(ConfigError(
                "--plot is only available for convergence and manufactured".into(),
            ));
        }

        Ok(Self {
            p,
            gamma0,
            f,
            u,
            domain,
            degrees,
            elements,
            epsilons,
            quad_points,
            solve,
            output: flags.output.or(file.output),
            format: flags.format.or(file.format).unwrap_or(default_format),
            plot,
        })
    }
}
