//! Manufactured solutions, convergence studies, and the identities of the
//! linear case used as independent correctness checks.

use std::sync::Arc;

use serde::Serialize;

use crate::energy::{gap_breakdown, GapBreakdown, PointState, ProblemData};
use crate::error::{Error, Result};
use crate::field::{Degree, FeField};
use crate::function::{signed_pow, ScalarFn};
use crate::mesh::Mesh1D;
use crate::par;
use crate::quadrature::QuadratureRule;
use crate::solver::{solve_pair, SolveOptions, SolveSummary};
use crate::uncertainty::{report_with_gap, IndeterminacyReport, UncertaintySpec};

/// A chosen exact solution `u` with the load synthesized from
/// `f = −u'' + γ∘ |u|^(p−2) u`. The exact flux is `p* = −u'`.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub u: ScalarFn,
    pub u_deriv: ScalarFn,
    pub u_second: ScalarFn,
    pub data: ProblemData,
    pub a: f64,
    pub b: f64,
}

/// Builds a manufactured case on `[a, b]`. `u` must vanish at both ends.
pub fn manufacture(
    u: ScalarFn,
    u_deriv: ScalarFn,
    u_second: ScalarFn,
    gamma0: ScalarFn,
    p: f64,
    a: f64,
    b: f64,
) -> Result<ManufacturedCase> {
    Mesh1D::uniform(a, b, 1)?;
    for x in [a, b] {
        let ux = u.eval(x);
        if !(ux.abs() <= 1e-12) {
            return Err(Error::InvalidData(format!(
                "manufactured solution must vanish on the boundary, u({x}) = {ux}"
            )));
        }
    }
    let load = {
        let (u, d2, g) = (u.clone(), u_second.clone(), gamma0.clone());
        ScalarFn::new(move |x| -d2.eval(x) + g.eval(x) * signed_pow(u.eval(x), p))
    };
    let data = ProblemData::new(p, gamma0, load)?;
    Ok(ManufacturedCase {
        u,
        u_deriv,
        u_second,
        data,
        a,
        b,
    })
}

impl ManufacturedCase {
    /// Exact dual solution `p*(x) = −u'(x)`.
    pub fn flux(&self, x: f64) -> f64 {
        -self.u_deriv.eval(x)
    }

    /// Nodal interpolants `(I_h u, I_h p*)`.
    pub fn interpolated_pair(
        &self,
        mesh: Arc<Mesh1D>,
        degree: Degree,
    ) -> Result<(FeField, FeField)> {
        let v = FeField::interpolate(|x| self.u.eval(x), mesh.clone(), degree, true)?;
        let y = FeField::interpolate(|x| self.flux(x), mesh, degree, false)?;
        Ok((v, y))
    }

    /// Largest `|f − (−u'' + γ∘|u|^(p−2)u)|` over the quadrature points of `mesh`.
    pub fn load_defect(&self, mesh: &Mesh1D) -> f64 {
        let p = self.data.p();
        let g = self.data.gamma0();
        mesh.min_over_samples(self.data.quadrature(), |x| {
            let want = -self.u_second.eval(x) + g.eval(x) * signed_pow(self.u.eval(x), p);
            -(self.data.load().eval(x) - want).abs()
        })
        .abs()
    }
}

/// How the discrete pair is obtained in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyMode {
    /// Interpolate the exact manufactured pair.
    Interpolate,
    /// Minimize/maximize the mean-data energies.
    Solve,
}

/// Problem a study runs on.
#[derive(Debug, Clone)]
pub enum StudySource {
    Manufactured(ManufacturedCase),
    Data { data: ProblemData, a: f64, b: f64 },
}

impl StudySource {
    pub fn data(&self) -> &ProblemData {
        match self {
            StudySource::Manufactured(c) => &c.data,
            StudySource::Data { data, .. } => data,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            StudySource::Manufactured(c) => (c.a, c.b),
            StudySource::Data { a, b, .. } => (*a, *b),
        }
    }
}

/// One (degree, mesh, ε) cell of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub degree: Degree,
    pub n_elements: usize,
    pub dofs: usize,
    pub h: f64,
    pub gap: GapBreakdown,
    pub report: IndeterminacyReport,
    /// Rate of `E∘` against the previous row of the same series,
    /// `log(E∘_prev / E∘) / log(h_prev / h)`.
    pub observed_rate: Option<f64>,
    /// Present in solve mode.
    pub solve: Option<SolveSummary>,
}

impl ConvergenceRow {
    /// False only for solve-mode rows whose solver did not converge.
    pub fn converged(&self) -> bool {
        self.solve.is_none_or(|s| s.converged)
    }
}

#[derive(Debug, Clone)]
pub struct StudyPlan {
    pub degrees: Vec<Degree>,
    pub element_counts: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub mode: StudyMode,
    pub solve_options: SolveOptions,
}

impl StudyPlan {
    fn validate(&self) -> Result<()> {
        if self.degrees.is_empty() || self.element_counts.is_empty() || self.epsilons.is_empty() {
            return Err(Error::InvalidStudy(
                "degrees, element counts and epsilons must be nonempty".into(),
            ));
        }
        if self.element_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStudy(
                "element counts must be strictly increasing".into(),
            ));
        }
        if self.element_counts[0] == 0 {
            return Err(Error::InvalidStudy(
                "element counts must be positive".into(),
            ));
        }
        self.solve_options.validate()
    }
}

struct Cell {
    degree: Degree,
    n: usize,
    v: FeField,
    y: FeField,
    gap: GapBreakdown,
    solve: Option<SolveSummary>,
}

/// Runs the study. Rows are ordered by degree, then ε, then mesh size, so
/// each (degree, ε) series is contiguous. Meshes are processed in parallel.
pub fn convergence_study(source: &StudySource, plan: &StudyPlan) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    if plan.mode == StudyMode::Interpolate && !matches!(source, StudySource::Manufactured(_)) {
        return Err(Error::InvalidStudy(
            "interpolate mode needs a manufactured solution".into(),
        ));
    }
    let data = source.data();
    let (a, b) = source.domain();
    let specs = plan
        .epsilons
        .iter()
        .map(|&e| UncertaintySpec::new(e))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(Degree, usize)> = plan
        .degrees
        .iter()
        .flat_map(|&d| plan.element_counts.iter().map(move |&n| (d, n)))
        .collect();
    let cells = par::map_slice(&jobs, |&(degree, n)| -> Result<Cell> {
        let mesh = Mesh1D::uniform(a, b, n)?.into_shared();
        for spec in &specs {
            spec.validate(data, &mesh)?;
        }
        match (plan.mode, source) {
            (StudyMode::Interpolate, StudySource::Manufactured(case)) => {
                let (v, y) = case.interpolated_pair(mesh, degree)?;
                let gap = gap_breakdown(&v, &y, data)?;
                Ok(Cell {
                    degree,
                    n,
                    v,
                    y,
                    gap,
                    solve: None,
                })
            }
            _ => {
                let sol = solve_pair(data, mesh, degree, &plan.solve_options)?;
                let summary = SolveSummary::from(&sol);
                Ok(Cell {
                    degree,
                    n,
                    gap: sol.gap,
                    v: sol.primal.field,
                    y: sol.dual.field,
                    solve: Some(summary),
                })
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let report_jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..specs.len()).map(move |s| (c, s)))
        .collect();
    let reports = par::map_slice(&report_jobs, |&(c, s)| {
        let cell = &cells[c];
        report_with_gap(&cell.v, &cell.y, data, &specs[s], cell.gap.e)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let n_meshes = plan.element_counts.len();
    let mut rows = Vec::with_capacity(reports.len());
    for (di, _) in plan.degrees.iter().enumerate() {
        for si in 0..specs.len() {
            let mut prev: Option<(f64, f64)> = None;
            for mi in 0..n_meshes {
                let ci = di * n_meshes + mi;
                let cell = &cells[ci];
                let h = (b - a) / cell.n as f64;
                let observed_rate =
                    prev.map(|(e_prev, h_prev)| (e_prev / cell.gap.e).ln() / (h_prev / h).ln());
                prev = Some((cell.gap.e, h));
                rows.push(ConvergenceRow {
                    degree: cell.degree,
                    n_elements: cell.n,
                    dofs: cell.degree.n_dofs(cell.n),
                    h,
                    gap: cell.gap,
                    report: reports[ci * specs.len() + si],
                    observed_rate,
                    solve: cell.solve,
                });
            }
        }
    }
    Ok(rows)
}

/// Rows of one (degree, ε) series.
pub fn series(rows: &[ConvergenceRow], degree: Degree, epsilon: f64) -> Vec<ConvergenceRow> {
    rows.iter()
        .filter(|r| r.degree == degree && r.report.epsilon == epsilon)
        .copied()
        .collect()
}

/// Smallest number of degrees of freedom at which the approximation error
/// is already dominated by the guaranteed indeterminacy error
/// (`E∘ ≤ eind_lower`). Expects the rows of a single series.
pub fn crossover_dofs(study: &[ConvergenceRow]) -> Option<usize> {
    study
        .iter()
        .filter(|r| r.report.e_circ <= r.report.eind_lower)
        .map(|r| r.dofs)
        .min()
}

/// Exact solution of the linear problem `−(γ'u')' + γ∘u = f` with its flux
/// `p* = −γ'u'` and `(p*)' = f − γ∘u`.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub u: ScalarFn,
    pub u_deriv: ScalarFn,
    pub flux: ScalarFn,
    pub flux_deriv: ScalarFn,
}

impl LinearSolution {
    /// Solution with constant coefficients `γ' > 0`, `γ∘ ≥ 0` and arbitrary
    /// load, by Green's function integrals evaluated with composite
    /// Gauss-Legendre quadrature on `panels` subintervals per side.
    pub fn constant_coefficients(
        gamma0: f64,
        gamma_prime: f64,
        f: ScalarFn,
        a: f64,
        b: f64,
        panels: usize,
    ) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma_prime > 0.0) {
            return Err(Error::InvalidData("need gamma0 >= 0 and gamma' > 0".into()));
        }
        Mesh1D::uniform(a, b, 1)?;
        let rule = QuadratureRule::gauss_legendre(10)?;
        let k = (gamma0 / gamma_prime).sqrt();
        let len = b - a;
        let panels = panels.max(1);
        // ∫_lo^hi w(s) f(s) ds / γ'
        let weighted = {
            let f = f.clone();
            move |lo: f64, hi: f64, w: &dyn Fn(f64) -> f64| -> f64 {
                if hi <= lo {
                    return 0.0;
                }
                let step = (hi - lo) / panels as f64;
                (0..panels)
                    .map(|i| {
                        let l = lo + i as f64 * step;
                        rule.integrate_interval(l, l + step, |s| w(s) * f.eval(s))
                    })
                    .sum::<f64>()
                    / gamma_prime
            }
        };
        let weighted = Arc::new(weighted);
        // (u(x), u'(x))
        let solve_at: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync> = if k == 0.0 {
            let w = weighted.clone();
            Arc::new(move |x: f64| {
                let left = w(a, x, &|s| s - a);
                let right = w(x, b, &|s| b - s);
                (
                    ((b - x) * left + (x - a) * right) / len,
                    (right - left) / len,
                )
            })
        } else {
            let w = weighted.clone();
            let denom = k * (k * len).sinh();
            Arc::new(move |x: f64| {
                let left = w(a, x, &|s| (k * (s - a)).sinh());
                let right = w(x, b, &|s| (k * (b - s)).sinh());
                let u = ((k * (b - x)).sinh() * left + (k * (x - a)).sinh() * right) / denom;
                let du = k * (-(k * (b - x)).cosh() * left + (k * (x - a)).cosh() * right) / denom;
                (u, du)
            })
        };
        let u = {
            let s = solve_at.clone();
            ScalarFn::new(move |x| s(x).0)
        };
        let u_deriv = {
            let s = solve_at.clone();
            ScalarFn::new(move |x| s(x).1)
        };
        let flux = {
            let s = solve_at.clone();
            ScalarFn::new(move |x| -gamma_prime * s(x).1)
        };
        let flux_deriv = {
            let s = solve_at;
            ScalarFn::new(move |x| f.eval(x) - gamma0 * s(x).0)
        };
        Ok(Self {
            u,
            u_deriv,
            flux,
            flux_deriv,
        })
    }

    /// Solution derived from a smooth `u` with known first and second
    /// derivatives for the coefficients of `data` (constant `γ'`).
    pub fn from_manufactured(
        u: ScalarFn,
        u_deriv: ScalarFn,
        u_second: ScalarFn,
        data: &ProblemData,
    ) -> Result<Self> {
        let gp = data.gamma_prime().as_constant().ok_or_else(|| {
            Error::InvalidData("manufactured linear solution needs a constant gamma'".into())
        })?;
        let flux = {
            let d = u_deriv.clone();
            ScalarFn::new(move |x| -gp * d.eval(x))
        };
        let flux_deriv = ScalarFn::new(move |x| -gp * u_second.eval(x));
        Ok(Self {
            u,
            u_deriv,
            flux,
            flux_deriv,
        })
    }
}

/// Both sides of an identity and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IdentityResidual {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            residual: lhs - rhs,
        }
    }

    /// `|residual| / max(1, rhs)`.
    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.rhs.abs().max(1.0)
    }
}

fn check_linear(v: &FeField, y: &FeField, data: &ProblemData) -> Result<()> {
    if data.p() != 2.0 || data.p_prime() != 2.0 {
        return Err(Error::InvalidData(
            "linear identities need p = p' = 2".into(),
        ));
    }
    if !v.dirichlet_zero() || y.dirichlet_zero() {
        return Err(Error::InvalidField(
            "expected a zero-trace primal field and an unconstrained dual field".into(),
        ));
    }
    if !v.same_mesh(y) {
        return Err(Error::MeshMismatch);
    }
    data.check_coefficients(v.mesh())
}

/// Error equality of the linear problem `−(γ'u')' + γ∘u = f`:
///
/// ```text
/// ‖v−u‖²_γ∘ + ‖(p*−y)'‖²_{1/γ∘} + ‖(v−u)'‖²_γ' + ‖y−p*‖²_{1/γ'}
///     = ‖γ∘v − f + y'‖²_{1/γ∘} + ‖γ'v' + y‖²_{1/γ'}
/// ```
pub fn error_equality(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    exact: &LinearSolution,
) -> Result<IdentityResidual> {
    check_linear(v, y, data)?;
    let mesh = v.mesh();
    let rule = data.quadrature();
    let lhs = mesh.integrate_samples(rule, |s| {
        let st = PointState::at(s, Some(v), Some(y), data);
        let e = st.v - exact.u.eval(s.x);
        let de = st.dv - exact.u_deriv.eval(s.x);
        let ef = exact.flux.eval(s.x) - st.y;
        let def = exact.flux_deriv.eval(s.x) - st.dy;
        st.gamma0 * e * e
            + def * def / st.gamma0
            + st.gamma_prime * de * de
            + ef * ef / st.gamma_prime
    })?;
    let rhs = mesh.integrate_samples(rule, |s| {
        let st = PointState::at(s, Some(v), Some(y), data);
        let r1 = st.gamma0 * st.v - st.f + st.dy;
        let r2 = st.gamma_prime * st.dv + st.y;
        r1 * r1 / st.gamma0 + r2 * r2 / st.gamma_prime
    })?;
    Ok(IdentityResidual::new(lhs, rhs))
}

/// Largest `|−y' + f|` over the quadrature points.
pub fn equilibrium_defect(y: &FeField, data: &ProblemData) -> (f64, f64) {
    let mesh = y.mesh();
    let mut worst = (0.0, mesh.a());
    for e in 0..mesh.n_elements() {
        for s in mesh.element_samples(e, data.quadrature()) {
            let r = (-y.local(e, s.xi).1 + data.load().eval(s.x)).abs();
            if r > worst.0 {
                worst = (r, s.x);
            }
        }
    }
    worst
}

/// Prager–Synge identity for the problem without reaction term,
/// `−(γ'u')' = f`, and an equilibrated flux (`−y' + f = 0`):
///
/// ```text
/// ‖(v−u)'‖²_γ' + ‖p*−y‖²_{1/γ'} = ‖γ'v' + y‖²_{1/γ'}
/// ```
///
/// Only `f` and `γ'` of `data` are used.
pub fn prager_synge(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    exact: &LinearSolution,
) -> Result<IdentityResidual> {
    check_linear(v, y, data)?;
    let scale = {
        let mesh = y.mesh();
        let fmax = -mesh.min_over_samples(data.quadrature(), |x| -data.load().eval(x).abs());
        1.0 + fmax
    };
    let (defect, x) = equilibrium_defect(y, data);
    if defect > 1e-10 * scale {
        return Err(Error::NotEquilibrated {
            x,
            residual: defect,
        });
    }
    let mesh = v.mesh();
    let rule = data.quadrature();
    let lhs = mesh.integrate_samples(rule, |s| {
        let st = PointState::at(s, Some(v), Some(y), data);
        let de = st.dv - exact.u_deriv.eval(s.x);
        let ef = exact.flux.eval(s.x) - st.y;
        st.gamma_prime * de * de + ef * ef / st.gamma_prime
    })?;
    let rhs = mesh.integrate_samples(rule, |s| {
        let st = PointState::at(s, Some(v), Some(y), data);
        let r = st.gamma_prime * st.dv + st.y;
        r * r / st.gamma_prime
    })?;
    Ok(IdentityResidual::new(lhs, rhs))
}

/// Flux `y(x) = y(a) + ∫_a^x f` interpolated on `mesh`. Equilibrated
/// exactly when the antiderivative lies in the finite element space.
pub fn equilibrated_flux(
    f: &ScalarFn,
    y_at_a: f64,
    mesh: Arc<Mesh1D>,
    degree: Degree,
) -> Result<FeField> {
    let rule = QuadratureRule::gauss_legendre(10)?;
    let a = mesh.a();
    let nodes = crate::field::lagrange_nodes(&mesh, degree);
    let mut coefficients = Vec::with_capacity(nodes.len());
    let mut acc = y_at_a;
    let mut prev = a;
    for x in nodes {
        acc += rule.integrate_interval(prev, x, |s| f.eval(s));
        prev = x;
        coefficients.push(acc);
    }
    FeField::new(mesh, degree, coefficients, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_case(k: f64, p: f64) -> ManufacturedCase {
        manufacture(
            ScalarFn::new(move |x| (k * PI * x).sin()),
            ScalarFn::new(move |x| k * PI * (k * PI * x).cos()),
            ScalarFn::new(move |x| -(k * PI).powi(2) * (k * PI * x).sin()),
            ScalarFn::new(|x| 1.0 + x),
            p,
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn manufactured_load_matches_formula() {
        let case = sine_case(2.0, 1.2);
        for x in [0.1, 0.37, 0.8] {
            let s = (2.0 * PI * x).sin();
            let want = 4.0 * PI * PI * s + (1.0 + x) * s.abs().powf(-0.8) * s;
            assert!((case.data.load().eval(x) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
        let mesh = Mesh1D::uniform(0.0, 1.0, 16).unwrap();
        assert!(case.load_defect(&mesh) < 1e-12);
        assert!((case.flux(0.0) + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn zero_solution_gives_zero_load() {
        let z = ScalarFn::zero();
        let case = manufacture(
            z.clone(),
            z.clone(),
            z,
            ScalarFn::constant(1.0),
            1.5,
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(case.data.load().eval(0.3), 0.0);
    }

    #[test]
    fn nonzero_trace_is_rejected() {
        let err = manufacture(
            ScalarFn::new(|x| x),
            ScalarFn::constant(1.0),
            ScalarFn::zero(),
            ScalarFn::constant(1.0),
            1.5,
            0.0,
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn crossover_picks_first_dominated_row() {
        let case = sine_case(2.0, 1.2);
        let plan = StudyPlan {
            degrees: vec![Degree::P1],
            element_counts: vec![4, 8, 16],
            epsilons: vec![0.5],
            mode: StudyMode::Interpolate,
            solve_options: SolveOptions::default(),
        };
        let rows = convergence_study(&StudySource::Manufactured(case), &plan).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].observed_rate.is_none());
        assert!(rows[1].observed_rate.is_some());
        // ε = 0.5 is large: the coarsest row is already dominated
        if rows[0].report.eind_lower >= rows[0].report.e_circ {
            assert_eq!(crossover_dofs(&rows), Some(5));
        }
        assert!(crossover_dofs(&[]).is_none());
    }

    #[test]
    fn study_validation() {
        let case = sine_case(2.0, 1.2);
        let source = StudySource::Manufactured(case.clone());
        let mut plan = StudyPlan {
            degrees: vec![Degree::P1],
            element_counts: vec![8, 4],
            epsilons: vec![0.1],
            mode: StudyMode::Interpolate,
            solve_options: SolveOptions::default(),
        };
        assert!(convergence_study(&source, &plan).is_err());
        plan.element_counts = vec![4, 8];
        plan.epsilons = vec![1.5];
        assert!(matches!(
            convergence_study(&source, &plan),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        let data_source = StudySource::Data {
            data: case.data,
            a: 0.0,
            b: 1.0,
        };
        plan.epsilons = vec![0.1];
        assert!(convergence_study(&data_source, &plan).is_err());
    }

    #[test]
    fn green_function_matches_closed_form() {
        let exact = |x: f64| 1.0 - (x - 0.5).cosh() / 0.5f64.cosh();
        let dexact = |x: f64| -(x - 0.5).sinh() / 0.5f64.cosh();
        let sol =
            LinearSolution::constant_coefficients(1.0, 1.0, ScalarFn::constant(1.0), 0.0, 1.0, 8)
                .unwrap();
        for x in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((sol.u.eval(x) - exact(x)).abs() < 1e-14);
            assert!((sol.u_deriv.eval(x) - dexact(x)).abs() < 1e-14);
            assert!((sol.flux.eval(x) + dexact(x)).abs() < 1e-14);
        }
        let poisson =
            LinearSolution::constant_coefficients(0.0, 1.0, ScalarFn::constant(1.0), 0.0, 1.0, 4)
                .unwrap();
        for x in [0.2, 0.5, 0.9] {
            assert!((poisson.u.eval(x) - 0.5 * x * (1.0 - x)).abs() < 1e-15);
            assert!((poisson.flux.eval(x) - (x - 0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn identities_vanish_at_solution() {
        let data = ProblemData::new(2.0, 1.0, 1.0).unwrap();
        let sol =
            LinearSolution::constant_coefficients(1.0, 1.0, ScalarFn::constant(1.0), 0.0, 1.0, 8)
                .unwrap();
        let mesh = Mesh1D::uniform(0.0, 1.0, 32).unwrap().into_shared();
        let v = FeField::interpolate(|x| sol.u.eval(x), mesh.clone(), Degree::P2, true).unwrap();
        let y =
            FeField::interpolate(|x| sol.flux.eval(x), mesh.clone(), Degree::P2, false).unwrap();
        let r = error_equality(&v, &y, &data, &sol).unwrap();
        assert!(r.relative() < 1e-12);

        let ps =
            LinearSolution::constant_coefficients(0.0, 1.0, ScalarFn::constant(1.0), 0.0, 1.0, 4)
                .unwrap();
        let v =
            FeField::interpolate(|x| 0.5 * x * (1.0 - x), mesh.clone(), Degree::P2, true).unwrap();
        let y = equilibrated_flux(data.load(), -0.5, mesh, Degree::P2).unwrap();
        let r = prager_synge(&v, &y, &data, &ps).unwrap();
        assert!(r.lhs.abs() < 1e-28 && r.rhs.abs() < 1e-28);
    }

    #[test]
    fn prager_synge_rejects_unbalanced_flux() {
        let data = ProblemData::new(2.0, 1.0, 1.0).unwrap();
        let ps =
            LinearSolution::constant_coefficients(0.0, 1.0, ScalarFn::constant(1.0), 0.0, 1.0, 4)
                .unwrap();
        let mesh = Mesh1D::uniform(0.0, 1.0, 8).unwrap().into_shared();
        let v = FeField::zeros(mesh.clone(), Degree::P1, true);
        // y' = -1 instead of +1
        let y = FeField::interpolate(|x| -x, mesh, Degree::P1, false).unwrap();
        assert!(matches!(
            prager_synge(&v, &y, &data, &ps),
            Err(Error::NotEquilibrated { .. })
        ));
    }
}
