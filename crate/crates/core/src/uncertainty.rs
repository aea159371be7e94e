//! Worst-case decomposition of the duality gap when the reaction coefficient
//! is `γ = γ∘ + δ` with `‖δ‖∞ ≤ ε`.
//!
//! Only `D_F` depends on `γ`. Its change under a perturbation is the
//! pointwise remainder density
//!
//! ```text
//! g(δ) = δ/p |v|^p + ((γ∘ + δ)^(1−q) − γ∘^(1−q)) / q · |r|^q,    r = −y' + f,
//! ```
//!
//! and a second-order expansion with Lagrange remainder point `c` gives
//! `g(δ) = h(δ, c)` for some `c` between 0 and `δ`. Because
//! `c ↦ (γ∘ + c)^(−q−1)` decreases, evaluating the quadratic term at
//! `c = +ε` (resp. `−ε`) bounds `g(±ε)` from below (resp. above).

use serde::{Deserialize, Serialize};

use crate::energy::{compound_df, gap_breakdown, PointState, ProblemData};
use crate::error::{Error, Result};
use crate::field::FeField;
use crate::function::abs_pow;
use crate::mesh::Mesh1D;

/// Radius of the admissible perturbation ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySpec {
    epsilon: f64,
}

impl UncertaintySpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::EpsilonOutOfRange {
                epsilon,
                min_gamma0: f64::NAN,
            });
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `ε < min γ∘`, with the minimum taken over the quadrature points of `mesh`.
    pub fn validate(&self, data: &ProblemData, mesh: &Mesh1D) -> Result<()> {
        let min_gamma0 = data.min_gamma0(mesh);
        if self.epsilon < min_gamma0 {
            Ok(())
        } else {
            Err(Error::EpsilonOutOfRange {
                epsilon: self.epsilon,
                min_gamma0,
            })
        }
    }
}

/// Second-order model `δ A + δ² B(c)` of the remainder density.
pub fn h_point(
    delta: f64,
    v_val: f64,
    r_val: f64,
    c: f64,
    gamma0_val: f64,
    p: f64,
    q: f64,
) -> Result<f64> {
    let shifted = gamma0_val + c;
    if !(shifted > 0.0) {
        return Err(Error::InvalidData(format!(
            "gamma0 + c must be positive, got {shifted}"
        )));
    }
    let rq = abs_pow(r_val, q);
    let linear = abs_pow(v_val, p) / p + (1.0 - q) * gamma0_val.powf(-q) * rq / q;
    let quadratic = 0.5 * (q - 1.0) * shifted.powf(-q - 1.0) * rq;
    Ok(delta * linear + delta * delta * quadratic)
}

/// Pointwise coefficients of the exact remainder density `g`.
#[derive(Debug, Clone, Copy)]
struct Remainder {
    gamma0: f64,
    /// `|v|^p / p`
    a: f64,
    /// `|r|^q / q`
    b: f64,
    q: f64,
}

impl Remainder {
    fn new(st: &PointState, p: f64, q: f64) -> Self {
        Self {
            gamma0: st.gamma0,
            a: abs_pow(st.v, p) / p,
            b: abs_pow(st.residual(), q) / q,
            q,
        }
    }

    fn at(&self, delta: f64) -> f64 {
        let q = self.q;
        delta * self.a + ((self.gamma0 + delta).powf(1.0 - q) - self.gamma0.powf(1.0 - q)) * self.b
    }

    /// Minimizer of the convex `g` over `[−ε, ε]`.
    fn argmin(&self, eps: f64) -> f64 {
        match (self.a > 0.0, self.b > 0.0) {
            (false, false) => 0.0,
            // g' = a > 0
            (true, false) => -eps,
            // g' < 0 everywhere
            (false, true) => eps,
            (true, true) => {
                let q = self.q;
                // g'(δ) = a − (q − 1)(γ∘ + δ)^(−q) b = 0
                let stationary = ((q - 1.0) * self.b / self.a).powf(1.0 / q) - self.gamma0;
                stationary.clamp(-eps, eps)
            }
        }
    }
}

fn check_theorem_inputs(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
) -> Result<()> {
    data.require_quadratic_gradient_unit()?;
    if !v.dirichlet_zero() || y.dirichlet_zero() {
        return Err(Error::InvalidField(
            "expected a zero-trace primal field and an unconstrained dual field".into(),
        ));
    }
    if !v.same_mesh(y) {
        return Err(Error::MeshMismatch);
    }
    data.check_coefficients(v.mesh())?;
    spec.validate(data, v.mesh())
}

/// Two-sided computable bounds `(lower, upper)` of the indeterminacy error.
pub fn eind_bounds(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
) -> Result<(f64, f64)> {
    check_theorem_inputs(v, y, data, spec)?;
    let (p, q, eps) = (data.p(), data.q(), spec.epsilon);
    let side = |c: f64| {
        v.mesh().integrate_samples(data.quadrature(), |s| {
            let st = PointState::at(s, Some(v), Some(y), data);
            let r = st.residual();
            let lo = h_point(-eps, st.v, r, c, st.gamma0, p, q).unwrap_or(f64::NAN);
            let hi = h_point(eps, st.v, r, c, st.gamma0, p, q).unwrap_or(f64::NAN);
            lo.max(hi)
        })
    };
    Ok((side(eps)?, side(-eps)?))
}

/// Exact indeterminacy error: the integral of `max{g(−ε), g(ε)}`. The
/// endpoint rule is exact because `g` is convex in `δ`.
pub fn eind_exact(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
) -> Result<f64> {
    check_theorem_inputs(v, y, data, spec)?;
    let (p, q, eps) = (data.p(), data.q(), spec.epsilon);
    v.mesh().integrate_samples(data.quadrature(), |s| {
        let g = Remainder::new(&PointState::at(s, Some(v), Some(y), data), p, q);
        g.at(-eps).max(g.at(eps))
    })
}

/// Error-reduction term: the integral of `min_{|δ| ≤ ε} g(δ)`. Never positive.
pub fn ecom_exact(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
) -> Result<f64> {
    check_theorem_inputs(v, y, data, spec)?;
    let (p, q, eps) = (data.p(), data.q(), spec.epsilon);
    v.mesh().integrate_samples(data.quadrature(), |s| {
        let g = Remainder::new(&PointState::at(s, Some(v), Some(y), data), p, q);
        // δ = 0 is admissible and g(0) = 0; guard against rounding above it
        g.at(g.argmin(eps)).min(0.0)
    })
}

/// Exact change of the gap, `E_γ − E∘`, for the perturbed coefficient
/// `γ∘ + δ`, computed from two full evaluations of `D_F`.
pub fn perturbed_gap_increase(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Result<f64> {
    let g0 = data.gamma0().clone();
    let perturbed = data
        .clone()
        .with_gamma0(crate::function::ScalarFn::new(move |x| {
            g0.eval(x) + delta(x)
        }));
    Ok(compound_df(v, y, &perturbed)? - compound_df(v, y, data)?)
}

/// Everything the worst-case decomposition yields for one pair and one `ε`.
/// Ratio entries are `NaN` when the worst-case gap bound is not positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndeterminacyReport {
    pub epsilon: f64,
    pub e_circ: f64,
    pub eind_lower: f64,
    pub eind_upper: f64,
    pub eind_exact: f64,
    pub ecom_exact: f64,
    pub eworst_lower: f64,
    pub eworst_upper: f64,
    pub ebest_exact: f64,
    pub diameter_lower: f64,
    pub diameter_upper: f64,
    pub rho_approx_lower: f64,
    pub rho_approx_upper: f64,
    pub rho_indet_lower: f64,
    pub rho_indet_upper: f64,
}

impl IndeterminacyReport {
    /// Assembles the report from the gap `e_circ` and the indeterminacy terms.
    pub fn from_parts(
        epsilon: f64,
        e_circ: f64,
        eind_lower: f64,
        eind_upper: f64,
        eind_exact: f64,
        ecom_exact: f64,
    ) -> Self {
        let eworst_lower = e_circ + eind_lower;
        let eworst_upper = e_circ + eind_upper;
        let ratio = |num: f64, den: f64| {
            if den > 0.0 {
                (num / den).clamp(0.0, 1.0)
            } else {
                f64::NAN
            }
        };
        let (rho_approx_lower, rho_approx_upper, rho_indet_lower, rho_indet_upper) =
            if eworst_lower > 0.0 {
                (
                    ratio(e_circ, eworst_upper),
                    ratio(e_circ, eworst_lower),
                    ratio(eind_lower, eworst_upper),
                    ratio(eind_upper, eworst_lower),
                )
            } else {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            };
        Self {
            epsilon,
            e_circ,
            eind_lower,
            eind_upper,
            eind_exact,
            ecom_exact,
            eworst_lower,
            eworst_upper,
            ebest_exact: e_circ + ecom_exact,
            diameter_lower: eind_lower - ecom_exact,
            diameter_upper: eind_upper - ecom_exact,
            rho_approx_lower,
            rho_approx_upper,
            rho_indet_lower,
            rho_indet_upper,
        }
    }

    /// Whether the ratio brackets are defined.
    pub fn ratios_defined(&self) -> bool {
        !self.rho_approx_lower.is_nan()
    }
}

/// Full decomposition for the pair `(v, y)`.
pub fn report(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
) -> Result<IndeterminacyReport> {
    let e_circ = gap_breakdown(v, y, data)?.e;
    report_with_gap(v, y, data, spec, e_circ)
}

/// Like [`report`] but reuses an already computed mean-data gap.
pub fn report_with_gap(
    v: &FeField,
    y: &FeField,
    data: &ProblemData,
    spec: &UncertaintySpec,
    e_circ: f64,
) -> Result<IndeterminacyReport> {
    let (lo, hi) = eind_bounds(v, y, data, spec)?;
    let exact = eind_exact(v, y, data, spec)?;
    let com = ecom_exact(v, y, data, spec)?;
    Ok(IndeterminacyReport::from_parts(
        spec.epsilon,
        e_circ,
        lo,
        hi,
        exact,
        com,
    ))
}
