//! Subcommand implementations.

use std::sync::Arc;

use anyhow::Result;
use dualgap::field::Degree;
use dualgap::solver::{maximize_dual, solve_linear_p2, solve_pair, SolveSummary};
use dualgap::verification::{
    convergence_study, equilibrated_flux, error_equality, manufacture, prager_synge,
    LinearSolution, StudyMode, StudyPlan, StudySource,
};
use dualgap::{Error, FeField, Mesh1D, ProblemData, QuadratureRule, ScalarFn, UncertaintySpec};

use crate::config::{CommandKind, Format, RunConfig};
use crate::expr::Expr;
use crate::report::{self, LinearRecord, SolveRecord, StudyRecord};
use crate::{core_error, ConfigError};

/// Rendered outputs of a run.
pub struct Artifacts {
    pub main: String,
    pub plots: Option<(String, String)>,
    pub ok: bool,
}

fn scalar_fn(e: &Expr) -> ScalarFn {
    match e.as_constant() {
        Some(c) => ScalarFn::constant(c),
        None => {
            let e = e.clone();
            ScalarFn::new(move |x| e.eval(x))
        }
    }
}

struct Derived {
    u: ScalarFn,
    du: ScalarFn,
    d2u: ScalarFn,
}

fn derive(u: &Expr) -> Result<Derived, ConfigError> {
    let du = u.derivative().map_err(|e| ConfigError(e.to_string()))?;
    let d2u = du.derivative().map_err(|e| ConfigError(e.to_string()))?;
    Ok(Derived {
        u: scalar_fn(u),
        du: scalar_fn(&du),
        d2u: scalar_fn(&d2u),
    })
}

fn source(cfg: &RunConfig, p: f64) -> Result<StudySource> {
    let rule = QuadratureRule::gauss_legendre(cfg.quad_points).map_err(core_error)?;
    let (a, b) = cfg.domain;
    let gamma0 = scalar_fn(&cfg.gamma0);
    Ok(match (&cfg.u, &cfg.f) {
        (Some(u), _) => {
            let d = derive(u)?;
            let mut case = manufacture(d.u, d.du, d.d2u, gamma0, p, a, b).map_err(core_error)?;
            case.data = case.data.with_quadrature(rule);
            StudySource::Manufactured(case)
        }
        (None, Some(f)) => StudySource::Data {
            data: ProblemData::new(p, gamma0, scalar_fn(f))
                .map_err(core_error)?
                .with_quadrature(rule),
            a,
            b,
        },
        (None, None) => unreachable!("checked while resolving the configuration"),
    })
}

fn meshes(cfg: &RunConfig) -> Result<Vec<Arc<Mesh1D>>> {
    let (a, b) = cfg.domain;
    cfg.elements
        .iter()
        .map(|&n| Ok(Mesh1D::uniform(a, b, n).map_err(core_error)?.into_shared()))
        .collect()
}

/// Checks coefficients and every ε against every mesh before computing.
fn precheck(data: &ProblemData, meshes: &[Arc<Mesh1D>], epsilons: &[f64]) -> Result<()> {
    for mesh in meshes {
        data.check_coefficients(mesh).map_err(core_error)?;
        for &eps in epsilons {
            UncertaintySpec::new(eps)
                .and_then(|s| s.validate(data, mesh))
                .map_err(core_error)?;
        }
    }
    Ok(())
}

fn cells(cfg: &RunConfig, meshes: &[Arc<Mesh1D>]) -> Vec<(Degree, Arc<Mesh1D>)> {
    cfg.degrees
        .iter()
        .flat_map(|&d| meshes.iter().map(move |m| (d, m.clone())))
        .collect()
}

pub fn execute(kind: CommandKind, cfg: &RunConfig) -> Result<Artifacts> {
    match kind {
        CommandKind::Solve => solve(cfg),
        CommandKind::Bounds => study(
            cfg,
            if cfg.u.is_some() {
                StudyMode::Interpolate
            } else {
                StudyMode::Solve
            },
        ),
        CommandKind::Convergence => study(cfg, StudyMode::Solve),
        CommandKind::Manufactured => study(cfg, StudyMode::Interpolate),
        CommandKind::LinearCheck => linear_check(cfg),
    }
}

fn solve(cfg: &RunConfig) -> Result<Artifacts> {
    let src = source(cfg, cfg.p)?;
    let data = src.data();
    let meshes = meshes(cfg)?;
    precheck(data, &meshes, &[])?;
    let records = dualgap::par::map_slice(
        &cells(cfg, &meshes),
        |(degree, mesh)| -> Result<SolveRecord> {
            let pair = solve_pair(data, mesh.clone(), *degree, &cfg.solve).map_err(core_error)?;
            Ok(SolveRecord {
                degree: degree.order(),
                n_elements: mesh.n_elements(),
                dofs: degree.n_dofs(mesh.n_elements()),
                h: mesh.h_max(),
                gap: pair.gap,
                solver: SolveSummary::from(&pair),
            })
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ok = records.iter().all(|r| r.solver.converged);
    let main = match cfg.format {
        Format::Json => report::json_text(&records)?,
        Format::Csv => report::solve_csv(&records)?,
    };
    Ok(Artifacts {
        main,
        plots: None,
        ok,
    })
}

fn study(cfg: &RunConfig, mode: StudyMode) -> Result<Artifacts> {
    let src = source(cfg, cfg.p)?;
    let meshes = meshes(cfg)?;
    precheck(src.data(), &meshes, &cfg.epsilons)?;
    let plan = StudyPlan {
        degrees: cfg.degrees.clone(),
        element_counts: cfg.elements.clone(),
        epsilons: cfg.epsilons.clone(),
        mode,
        solve_options: cfg.solve,
    };
    let rows = convergence_study(&src, &plan).map_err(core_error)?;
    let records: Vec<StudyRecord> = rows.iter().map(StudyRecord::from).collect();
    let ok = records.iter().all(|r| r.converged);
    let csv = report::study_csv(&records)?;
    let plots = match &cfg.plot {
        Some(_) => Some((
            crate::plot::convergence_svg(&csv)?,
            crate::plot::ratios_svg(&csv)?,
        )),
        None => None,
    };
    let main = match cfg.format {
        Format::Csv => csv,
        Format::Json => report::json_text(&records)?,
    };
    Ok(Artifacts { main, plots, ok })
}

const GREEN_PANELS: usize = 64;

fn linear_check(cfg: &RunConfig) -> Result<Artifacts> {
    if cfg.p != 2.0 {
        return Err(ConfigError(format!("linear-check needs p = 2, got {}", cfg.p)).into());
    }
    let src = source(cfg, 2.0)?;
    let data = src.data();
    let (a, b) = cfg.domain;
    let exact = match (&cfg.u, cfg.gamma0.as_constant()) {
        (Some(u), _) => {
            let d = derive(u)?;
            LinearSolution::from_manufactured(d.u, d.du, d.d2u, data).map_err(core_error)?
        }
        (None, Some(g0)) => {
            LinearSolution::constant_coefficients(g0, 1.0, data.load().clone(), a, b, GREEN_PANELS)
                .map_err(core_error)?
        }
        (None, None) => {
            return Err(ConfigError(
                "linear-check needs a constant --gamma0 or a manufactured --u".into(),
            )
            .into())
        }
    };
    let poisson =
        LinearSolution::constant_coefficients(0.0, 1.0, data.load().clone(), a, b, GREEN_PANELS)
            .map_err(core_error)?;
    let meshes = meshes(cfg)?;
    precheck(data, &meshes, &[])?;

    let records = dualgap::par::map_slice(
        &cells(cfg, &meshes),
        |(degree, mesh)| -> Result<LinearRecord> {
            let v = solve_linear_p2(data, mesh.clone(), *degree).map_err(core_error)?;
            let y0 = FeField::zeros(mesh.clone(), *degree, false);
            let y = maximize_dual(data, &y0, &cfg.solve)
                .map_err(core_error)?
                .field;
            let ee = error_equality(&v, &y, data, &exact).map_err(core_error)?;
            let y_eq = equilibrated_flux(data.load(), poisson.flux.eval(a), mesh.clone(), *degree)
                .map_err(core_error)?;
            let (ps, skipped) = match prager_synge(&v, &y_eq, data, &poisson) {
                Ok(r) => (Some(r.into()), None),
                Err(e @ Error::NotEquilibrated { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(core_error(e)),
            };
            Ok(LinearRecord {
                degree: degree.order(),
                n_elements: mesh.n_elements(),
                error_equality: ee.into(),
                prager_synge: ps,
                prager_synge_skipped: skipped,
            })
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ok = records
        .iter()
        .all(|r| r.worst_relative() <= LINEAR_TOLERANCE);
    let main = match cfg.format {
        Format::Json => report::json_text(&records)?,
        Format::Csv => report::linear_csv(&records)?,
    };
    Ok(Artifacts {
        main,
        plots: None,
        ok,
    })
}

/// Relative residual above which `linear-check` reports a numerical failure.
pub const LINEAR_TOLERANCE: f64 = 1e-9;
