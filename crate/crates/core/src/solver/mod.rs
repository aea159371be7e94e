//! Discrete primal minimizers and dual maximizers of the mean-data energies.

mod assembly;
mod bfgs;
mod linear;

use std::sync::Arc;

pub use assembly::{assemble_dual_gradient, assemble_primal_gradient};
pub use bfgs::{minimize, LineSearch, Minimum, SolveOptions};
pub use linear::{solve_linear_p2, BandedSpd};

use serde::Serialize;

use crate::energy::{dual_energy, gap_breakdown, primal_energy, GapBreakdown, ProblemData};
use crate::error::{Error, Result};
use crate::field::{Degree, FeField};
use crate::mesh::Mesh1D;

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: FeField,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// Stopping threshold the gradient was compared against.
    pub grad_threshold: f64,
    pub converged: bool,
    pub line_search_failed: bool,
    /// `J(v)` for primal solves, `I*(y)` for dual solves.
    pub energy: f64,
    /// Energy after each accepted step (`J` decreasing or `I*` increasing).
    pub history: Vec<f64>,
}

/// Minimizes `J` over the zero-trace space of `initial`.
pub fn minimize_primal(
    data: &ProblemData,
    initial: &FeField,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if !initial.dirichlet_zero() {
        return Err(Error::InvalidField(
            "primal field must have zero trace".into(),
        ));
    }
    data.check_coefficients(initial.mesh())?;
    let n = initial.n_dofs();
    let x0 = initial.coefficients()[1..n - 1].to_vec();
    let lift = |x: &[f64]| {
        let mut c = Vec::with_capacity(n);
        c.push(0.0);
        c.extend_from_slice(x);
        c.push(0.0);
        initial.with_coefficients(c)
    };
    let m = minimize(
        x0,
        |x| {
            let v = lift(x)?;
            let j = primal_energy(&v, data)?;
            let g = assembly::primal_gradient_full(&v, data);
            Ok((j, g[1..n - 1].to_vec()))
        },
        opts,
    )?;
    Ok(SolveResult {
        field: lift(&m.x)?,
        iterations: m.iterations,
        final_grad_norm: m.grad_norm,
        grad_threshold: m.threshold,
        converged: m.converged,
        line_search_failed: m.line_search_failed,
        energy: m.value,
        history: m.history,
    })
}

/// Maximizes `I*` (by minimizing `−I*`) over the space of `initial`.
pub fn maximize_dual(
    data: &ProblemData,
    initial: &FeField,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if initial.dirichlet_zero() {
        return Err(Error::InvalidField(
            "dual field must not carry a zero-trace constraint".into(),
        ));
    }
    data.check_coefficients(initial.mesh())?;
    let m = minimize(
        initial.coefficients().to_vec(),
        |x| {
            let y = initial.with_coefficients(x.to_vec())?;
            let neg = -dual_energy(&y, data)?;
            Ok((neg, assembly::neg_dual_gradient(&y, data)))
        },
        opts,
    )?;
    Ok(SolveResult {
        field: initial.with_coefficients(m.x)?,
        iterations: m.iterations,
        final_grad_norm: m.grad_norm,
        grad_threshold: m.threshold,
        converged: m.converged,
        line_search_failed: m.line_search_failed,
        energy: -m.value,
        history: m.history.into_iter().map(|v| -v).collect(),
    })
}

/// Primal and dual solves on one mesh plus the resulting gap.
#[derive(Debug, Clone)]
pub struct PairSolution {
    pub primal: SolveResult,
    pub dual: SolveResult,
    pub gap: GapBreakdown,
}

impl PairSolution {
    pub fn converged(&self) -> bool {
        self.primal.converged && self.dual.converged
    }

    /// `I*(y_h) ≤ J(v_h)` up to `1e−10`.
    pub fn weak_duality_holds(&self) -> bool {
        self.dual.energy <= self.primal.energy + 1e-10
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSummary {
    pub primal_iterations: usize,
    pub dual_iterations: usize,
    pub primal_grad_norm: f64,
    pub dual_grad_norm: f64,
    pub converged: bool,
    pub weak_duality: bool,
}

impl From<&PairSolution> for SolveSummary {
    fn from(s: &PairSolution) -> Self {
        Self {
            primal_iterations: s.primal.iterations,
            dual_iterations: s.dual.iterations,
            primal_grad_norm: s.primal.final_grad_norm,
            dual_grad_norm: s.dual.final_grad_norm,
            converged: s.converged(),
            weak_duality: s.weak_duality_holds(),
        }
    }
}

/// Solves both problems from zero initial guesses.
pub fn solve_pair(
    data: &ProblemData,
    mesh: Arc<Mesh1D>,
    degree: Degree,
    opts: &SolveOptions,
) -> Result<PairSolution> {
    let primal = minimize_primal(data, &FeField::zeros(mesh.clone(), degree, true), opts)?;
    let dual = maximize_dual(data, &FeField::zeros(mesh, degree, false), opts)?;
    let gap = gap_breakdown(&primal.field, &dual.field, data)?;
    Ok(PairSolution { primal, dual, gap })
}
