//! Primal and dual energies, compound functionals and the duality gap for
//!
//! ```text
//! J(v)   = ∫ γ'/p' |v'|^p' + γ/p |v|^p − f v
//! I*(y)  = −∫ (1/q) γ^(1−q) |−y' + f|^q + (1/q') γ'^(1−q') |y|^q'
//! D_F    = ∫ γ/p |v|^p + (1/q) γ^(1−q) |r|^q − r v,      r = −y' + f
//! D_G    = ∫ γ'/p' |v'|^p' + (1/q') γ'^(1−q') |y|^q' + v' y
//! ```
//!
//! with `J − I* = D_F + D_G` for every zero-trace `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FeField;
use crate::function::{abs_pow, ScalarFn};
use crate::mesh::{Mesh1D, Sample};
use crate::quadrature::QuadratureRule;

/// Conjugate exponent `s / (s − 1)`.
pub fn conjugate_exponent(s: f64) -> f64 {
    s / (s - 1.0)
}

/// Exponents, coefficients and load of the reaction-diffusion problem.
#[derive(Debug, Clone)]
pub struct ProblemData {
    p: f64,
    q: f64,
    p_prime: f64,
    q_prime: f64,
    gamma0: ScalarFn,
    gamma_prime: ScalarFn,
    f: ScalarFn,
    rule: QuadratureRule,
}

impl ProblemData {
    /// Data with `p' = 2`, `γ' = 1` and the default quadrature rule.
    pub fn new(p: f64, gamma0: impl Into<ScalarFn>, f: impl Into<ScalarFn>) -> Result<Self> {
        let data = Self {
            p,
            q: conjugate_exponent(p),
            p_prime: 2.0,
            q_prime: 2.0,
            gamma0: gamma0.into(),
            gamma_prime: ScalarFn::constant(1.0),
            f: f.into(),
            rule: QuadratureRule::default(),
        };
        data.validate_exponents()?;
        Ok(data)
    }

    pub fn with_gradient_exponent(mut self, p_prime: f64) -> Result<Self> {
        self.p_prime = p_prime;
        self.q_prime = conjugate_exponent(p_prime);
        self.validate_exponents()?;
        Ok(self)
    }

    pub fn with_gamma_prime(mut self, gamma_prime: impl Into<ScalarFn>) -> Self {
        self.gamma_prime = gamma_prime.into();
        self
    }

    pub fn with_gamma0(mut self, gamma0: impl Into<ScalarFn>) -> Self {
        self.gamma0 = gamma0.into();
        self
    }

    pub fn with_load(mut self, f: impl Into<ScalarFn>) -> Self {
        self.f = f.into();
        self
    }

    pub fn with_exponent(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.q = conjugate_exponent(p);
        self.validate_exponents()?;
        Ok(self)
    }

    pub fn with_quadrature(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate_exponents(&self) -> Result<()> {
        let p = self.p;
        if !(p.is_finite() && p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidData(format!("p must lie in (1, 2], got {p}")));
        }
        let pp = self.p_prime;
        if !(pp.is_finite() && pp > 1.0) {
            return Err(Error::InvalidData(format!("p' must exceed 1, got {pp}")));
        }
        if p > pp {
            return Err(Error::InvalidData(format!(
                "need p <= p', got p = {p}, p' = {pp}"
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn p_prime(&self) -> f64 {
        self.p_prime
    }
    pub fn q_prime(&self) -> f64 {
        self.q_prime
    }
    pub fn gamma0(&self) -> &ScalarFn {
        &self.gamma0
    }
    pub fn gamma_prime(&self) -> &ScalarFn {
        &self.gamma_prime
    }
    pub fn load(&self) -> &ScalarFn {
        &self.f
    }
    pub fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `p' = 2` and `γ' ≡ 1`: the setting of the indeterminacy bounds and the solvers.
    pub fn is_quadratic_gradient_unit(&self) -> bool {
        self.p_prime == 2.0 && self.gamma_prime.as_constant() == Some(1.0)
    }

    pub(crate) fn require_quadratic_gradient_unit(&self) -> Result<()> {
        if self.is_quadratic_gradient_unit() {
            Ok(())
        } else {
            Err(Error::InvalidData(
                "this operation requires p' = 2 and a constant gamma' = 1".into(),
            ))
        }
    }

    /// Smallest γ∘ over the quadrature points of `mesh`.
    pub fn min_gamma0(&self, mesh: &Mesh1D) -> f64 {
        mesh.min_over_samples(&self.rule, |x| self.gamma0.eval(x))
    }

    /// Checks γ∘ > 0 and γ' > 0 at every quadrature point of `mesh`.
    pub fn check_coefficients(&self, mesh: &Mesh1D) -> Result<()> {
        let g0 = self.min_gamma0(mesh);
        if !(g0 > 0.0) {
            return Err(Error::InvalidData(format!(
                "gamma0 must be positive, minimum over quadrature points is {g0}"
            )));
        }
        let gp = mesh.min_over_samples(&self.rule, |x| self.gamma_prime.eval(x));
        if !(gp > 0.0) {
            return Err(Error::InvalidData(format!(
                "gamma' must be positive, minimum over quadrature points is {gp}"
            )));
        }
        Ok(())
    }
}

/// Duality gap together with its two compound-functional parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBreakdown {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "I_star")]
    pub i_star: f64,
    #[serde(rename = "D_F")]
    pub d_f: f64,
    #[serde(rename = "D_G")]
    pub d_g: f64,
    /// `D_F + D_G`.
    #[serde(rename = "E")]
    pub e: f64,
}

impl GapBreakdown {
    /// `J − I*`, computed from the energies rather than the compound functionals.
    pub fn energy_gap(&self) -> f64 {
        self.j - self.i_star
    }
}

fn check_primal(v: &FeField) -> Result<()> {
    if !v.dirichlet_zero() {
        return Err(Error::InvalidField(
            "primal field must have zero trace".into(),
        ));
    }
    Ok(())
}

fn check_dual(y: &FeField) -> Result<()> {
    if y.dirichlet_zero() {
        return Err(Error::InvalidField(
            "dual field must not carry a zero-trace constraint".into(),
        ));
    }
    Ok(())
}

fn check_pair(v: &FeField, y: &FeField) -> Result<()> {
    check_primal(v)?;
    check_dual(y)?;
    if !v.same_mesh(y) {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

/// Values needed by the energy densities at one quadrature point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointState {
    pub v: f64,
    pub dv: f64,
    pub y: f64,
    pub dy: f64,
    pub gamma0: f64,
    pub gamma_prime: f64,
    pub f: f64,
}

impl PointState {
    pub fn at(s: &Sample, v: Option<&FeField>, y: Option<&FeField>, data: &ProblemData) -> Self {
        let (v, dv) = v.map_or((0.0, 0.0), |v| v.local(s.element, s.xi));
        let (y, dy) = y.map_or((0.0, 0.0), |y| y.local(s.element, s.xi));
        Self {
            v,
            dv,
            y,
            dy,
            gamma0: data.gamma0.eval(s.x),
            gamma_prime: data.gamma_prime.eval(s.x),
            f: data.f.eval(s.x),
        }
    }

    /// Dual residual `−y' + f`.
    #[inline]
    pub fn residual(&self) -> f64 {
        -self.dy + self.f
    }
}

#[inline]
fn reaction_density(st: &PointState, p: f64) -> f64 {
    st.gamma0 / p * abs_pow(st.v, p)
}

#[inline]
fn reaction_conjugate_density(st: &PointState, q: f64) -> f64 {
    st.gamma0.powf(1.0 - q) / q * abs_pow(st.residual(), q)
}

#[inline]
fn diffusion_density(st: &PointState, pp: f64) -> f64 {
    st.gamma_prime / pp * abs_pow(st.dv, pp)
}

#[inline]
fn diffusion_conjugate_density(st: &PointState, qq: f64) -> f64 {
    st.gamma_prime.powf(1.0 - qq) / qq * abs_pow(st.y, qq)
}

#[inline]
pub(crate) fn df_density(st: &PointState, p: f64, q: f64) -> f64 {
    reaction_density(st, p) + reaction_conjugate_density(st, q) - st.residual() * st.v
}

#[inline]
fn dg_density(st: &PointState, pp: f64, qq: f64) -> f64 {
    if pp == 2.0 {
        let t = st.gamma_prime * st.dv + st.y;
        0.5 * t * t / st.gamma_prime
    } else {
        diffusion_density(st, pp) + diffusion_conjugate_density(st, qq) + st.dv * st.y
    }
}

/// Primal energy `J(v)`.
pub fn primal_energy(v: &FeField, data: &ProblemData) -> Result<f64> {
    check_primal(v)?;
    data.check_coefficients(v.mesh())?;
    let (p, pp) = (data.p, data.p_prime);
    v.mesh().integrate_samples(&data.rule, |s| {
        let st = PointState::at(s, Some(v), None, data);
        diffusion_density(&st, pp) + reaction_density(&st, p) - st.f * st.v
    })
}

/// Dual energy `I*(y)`.
pub fn dual_energy(y: &FeField, data: &ProblemData) -> Result<f64> {
    check_dual(y)?;
    data.check_coefficients(y.mesh())?;
    let (q, qq) = (data.q, data.q_prime);
    let neg = y.mesh().integrate_samples(&data.rule, |s| {
        let st = PointState::at(s, None, Some(y), data);
        reaction_conjugate_density(&st, q) + diffusion_conjugate_density(&st, qq)
    })?;
    Ok(-neg)
}

/// Compound functional `D_F(v, −y')` for the reaction part.
pub fn compound_df(v: &FeField, y: &FeField, data: &ProblemData) -> Result<f64> {
    check_pair(v, y)?;
    data.check_coefficients(v.mesh())?;
    let (p, q) = (data.p, data.q);
    v.mesh().integrate_samples(&data.rule, |s| {
        df_density(&PointState::at(s, Some(v), Some(y), data), p, q)
    })
}

/// `D_F` for `p = q = 2` through the completed square `½ ∫ (γv + y' − f)² / γ`.
pub fn compound_df_quadratic(v: &FeField, y: &FeField, data: &ProblemData) -> Result<f64> {
    check_pair(v, y)?;
    if data.p != 2.0 {
        return Err(Error::InvalidData(format!(
            "completed-square form needs p = 2, got {}",
            data.p
        )));
    }
    data.check_coefficients(v.mesh())?;
    v.mesh().integrate_samples(&data.rule, |s| {
        let st = PointState::at(s, Some(v), Some(y), data);
        let t = st.gamma0 * st.v + st.dy - st.f;
        0.5 * t * t / st.gamma0
    })
}

/// Compound functional `D_G(v', −y)` for the diffusion part. For `p' = 2`
/// the completed square `½ ∫ (γ'v' + y)² / γ'` is used.
pub fn compound_dg(v: &FeField, y: &FeField, data: &ProblemData) -> Result<f64> {
    check_pair(v, y)?;
    data.check_coefficients(v.mesh())?;
    let (pp, qq) = (data.p_prime, data.q_prime);
    v.mesh().integrate_samples(&data.rule, |s| {
        dg_density(&PointState::at(s, Some(v), Some(y), data), pp, qq)
    })
}

/// All five gap quantities. `E` is `D_F + D_G`; `J − I*` is available
/// separately through [`GapBreakdown::energy_gap`].
pub fn gap_breakdown(v: &FeField, y: &FeField, data: &ProblemData) -> Result<GapBreakdown> {
    let j = primal_energy(v, data)?;
    let i_star = dual_energy(y, data)?;
    let d_f = compound_df(v, y, data)?;
    let d_g = compound_dg(v, y, data)?;
    Ok(GapBreakdown {
        j,
        i_star,
        d_f,
        d_g,
        e: d_f + d_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Degree;
    use crate::mesh::Mesh1D;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn mesh(n: usize) -> Arc<Mesh1D> {
        Mesh1D::uniform(0.0, 1.0, n).unwrap().into_shared()
    }

    fn quad_data(f: f64) -> ProblemData {
        ProblemData::new(2.0, 1.0, f).unwrap()
    }

    #[test]
    fn conjugates_follow_p() {
        let d = ProblemData::new(1.2, 1.0, 1.0).unwrap();
        assert_relative_eq!(1.0 / d.p() + 1.0 / d.q(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(d.q(), 6.0, epsilon = 1e-12);
        let d = d.with_gradient_exponent(3.0).unwrap();
        assert_relative_eq!(1.0 / d.p_prime() + 1.0 / d.q_prime(), 1.0, epsilon = 1e-14);
        assert!(ProblemData::new(1.0, 1.0, 1.0).is_err());
        assert!(ProblemData::new(2.5, 1.0, 1.0).is_err());
        assert!(ProblemData::new(1.5, 1.0, 1.0)
            .unwrap()
            .with_gradient_exponent(1.4)
            .is_err());
    }

    #[test]
    fn zero_fields_have_zero_energy() {
        let d = quad_data(0.0);
        let v = FeField::zeros(mesh(4), Degree::P1, true);
        let y = FeField::zeros(mesh(4), Degree::P1, false);
        assert_eq!(primal_energy(&v, &d).unwrap(), 0.0);
        assert_eq!(dual_energy(&y, &d).unwrap(), 0.0);
        assert_eq!(primal_energy(&v, &quad_data(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn primal_energy_of_parabola() {
        let v = FeField::interpolate(|x| x * (1.0 - x), mesh(8), Degree::P2, true).unwrap();
        let j = primal_energy(&v, &quad_data(0.0)).unwrap();
        assert!((j - 11.0 / 60.0).abs() < 1e-8, "{j}");
    }

    #[test]
    fn dual_energy_of_constant() {
        let y = FeField::interpolate(|_| 0.7, mesh(3), Degree::P1, false).unwrap();
        assert_relative_eq!(
            dual_energy(&y, &quad_data(0.0)).unwrap(),
            -0.5 * 0.49,
            epsilon = 1e-14
        );
    }

    #[test]
    fn df_examples() {
        let d = quad_data(0.0);
        let v = FeField::interpolate(|x| x * (1.0 - x), mesh(8), Degree::P2, true).unwrap();
        let y0 = FeField::zeros(mesh(8), Degree::P2, false);
        let df = compound_df(&v, &y0, &d).unwrap();
        assert!((df - 1.0 / 60.0).abs() < 1e-8);

        // -y' + f = 0 and v = 0
        let d1 = quad_data(1.0);
        let y = FeField::interpolate(|x| x - 0.3, mesh(8), Degree::P1, false).unwrap();
        let z = FeField::zeros(mesh(8), Degree::P1, true);
        assert!(compound_df(&z, &y, &d1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn quadratic_path_matches_generic() {
        let d =
            ProblemData::new(2.0, ScalarFn::new(|x| 1.0 + x), ScalarFn::new(|x| x.cos())).unwrap();
        let v = FeField::interpolate(
            |x| (3.0 * x).sin() * x * (1.0 - x),
            mesh(6),
            Degree::P2,
            true,
        )
        .unwrap();
        let y = FeField::interpolate(|x| x.exp() - 2.0 * x, mesh(6), Degree::P2, false).unwrap();
        let a = compound_df(&v, &y, &d).unwrap();
        let b = compound_df_quadratic(&v, &y, &d).unwrap();
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn dg_examples() {
        let d = quad_data(0.0);
        let ones = FeField::interpolate(|_| 1.0, mesh(3), Degree::P1, false).unwrap();
        let z = FeField::zeros(mesh(3), Degree::P1, true);
        assert_relative_eq!(compound_dg(&z, &ones, &d).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn dg_vanishes_for_matching_flux() {
        let d = quad_data(0.0);
        let m = mesh(4);
        let v = FeField::interpolate(|x| x * (1.0 - x), m.clone(), Degree::P2, true).unwrap();
        let y = FeField::interpolate(|x| 2.0 * x - 1.0, m, Degree::P2, false).unwrap();
        assert!(compound_dg(&v, &y, &d).unwrap() < 1e-28);
    }

    #[test]
    fn gap_of_zero_pair_with_unit_load() {
        let d = quad_data(1.0);
        let v = FeField::zeros(mesh(5), Degree::P1, true);
        let y = FeField::zeros(mesh(5), Degree::P1, false);
        let g = gap_breakdown(&v, &y, &d).unwrap();
        assert_relative_eq!(g.d_f, 0.5, epsilon = 1e-15);
        assert_eq!(g.d_g, 0.0);
        assert_relative_eq!(g.e, 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.energy_gap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn general_gradient_exponent_gap_identity() {
        let d = ProblemData::new(1.5, 2.0, ScalarFn::new(|x| 1.0 + x))
            .unwrap()
            .with_gradient_exponent(3.0)
            .unwrap()
            .with_gamma_prime(ScalarFn::new(|x| 1.0 + 0.5 * x));
        let m = mesh(7);
        let v = FeField::interpolate(
            |x| (4.0 * x).sin() * x * (1.0 - x),
            m.clone(),
            Degree::P2,
            true,
        )
        .unwrap();
        let y = FeField::interpolate(|x| x * x - 0.2, m, Degree::P2, false).unwrap();
        let g = gap_breakdown(&v, &y, &d).unwrap();
        assert!(g.d_f >= 0.0 && g.d_g >= 0.0);
        assert!((g.energy_gap() - g.e).abs() <= 1e-12 * (1.0 + g.j.abs() + g.i_star.abs()));
    }

    #[test]
    fn precondition_errors() {
        let d = quad_data(1.0);
        let v = FeField::zeros(mesh(2), Degree::P1, false);
        assert!(primal_energy(&v, &d).is_err());
        let y = FeField::zeros(mesh(2), Degree::P1, true);
        assert!(dual_energy(&y, &d).is_err());
        let v = FeField::zeros(mesh(2), Degree::P1, true);
        let y = FeField::zeros(mesh(3), Degree::P1, false);
        assert_eq!(compound_df(&v, &y, &d), Err(Error::MeshMismatch));
        let bad = ProblemData::new(2.0, ScalarFn::new(|x| x - 0.5), 1.0).unwrap();
        let y = FeField::zeros(mesh(2), Degree::P1, false);
        assert!(matches!(
            compound_df(&v, &y, &bad),
            Err(Error::InvalidData(_))
        ));
        assert!(compound_df_quadratic(&v, &y, &ProblemData::new(1.5, 1.0, 1.0).unwrap()).is_err());
    }
}
