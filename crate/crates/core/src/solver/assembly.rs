//! Gradients of the discrete energies with respect to the nodal coefficients.

use crate::energy::{PointState, ProblemData};
use crate::error::{Error, Result};
use crate::field::FeField;
use crate::function::signed_pow;
use crate::par;

/// Scatters per-element local vectors into a global vector.
fn scatter(field: &FeField, locals: Vec<[f64; 3]>) -> Vec<f64> {
    let nl = field.degree().n_local();
    let mut out = vec![0.0; field.n_dofs()];
    for (e, local) in locals.into_iter().enumerate() {
        for (k, value) in local.iter().enumerate().take(nl) {
            out[field.global_index(e, k)] += value;
        }
    }
    out
}

/// Gradient of `J` with respect to all coefficients of `v` (boundary
/// entries included).
pub(crate) fn primal_gradient_full(v: &FeField, data: &ProblemData) -> Vec<f64> {
    let mesh = v.mesh();
    let rule = data.quadrature();
    let deg = v.degree();
    let (p, pp) = (data.p(), data.p_prime());
    let locals = par::map_indexed(mesh.n_elements(), |e| {
        let (lo, hi) = mesh.element(e);
        let jac_inv = 2.0 / (hi - lo);
        let mut local = [0.0; 3];
        for s in mesh.element_samples(e, rule) {
            let st = PointState::at(&s, Some(v), None, data);
            let flux = st.gamma_prime * signed_pow(st.dv, pp);
            let reaction = st.gamma0 * signed_pow(st.v, p) - st.f;
            let phi = deg.basis(s.xi);
            let dphi = deg.basis_deriv(s.xi);
            for k in 0..deg.n_local() {
                local[k] += s.weight * (flux * dphi[k] * jac_inv + reaction * phi[k]);
            }
        }
        local
    });
    scatter(v, locals)
}

/// Gradient of `−I*` with respect to all coefficients of `y`.
pub(crate) fn neg_dual_gradient(y: &FeField, data: &ProblemData) -> Vec<f64> {
    let mesh = y.mesh();
    let rule = data.quadrature();
    let deg = y.degree();
    let (q, qq) = (data.q(), data.q_prime());
    let locals = par::map_indexed(mesh.n_elements(), |e| {
        let (lo, hi) = mesh.element(e);
        let jac_inv = 2.0 / (hi - lo);
        let mut local = [0.0; 3];
        for s in mesh.element_samples(e, rule) {
            let st = PointState::at(&s, None, Some(y), data);
            let a = st.gamma0.powf(1.0 - q) * signed_pow(st.residual(), q);
            let b = st.gamma_prime.powf(1.0 - qq) * signed_pow(st.y, qq);
            let phi = deg.basis(s.xi);
            let dphi = deg.basis_deriv(s.xi);
            for k in 0..deg.n_local() {
                local[k] += s.weight * (-a * dphi[k] * jac_inv + b * phi[k]);
            }
        }
        local
    });
    scatter(y, locals)
}

/// `∂J/∂cᵢ` over the interior Lagrange nodes of the zero-trace field `v`.
pub fn assemble_primal_gradient(v: &FeField, data: &ProblemData) -> Result<Vec<f64>> {
    if !v.dirichlet_zero() {
        return Err(Error::InvalidField(
            "primal field must have zero trace".into(),
        ));
    }
    data.check_coefficients(v.mesh())?;
    let full = primal_gradient_full(v, data);
    Ok(full[1..full.len() - 1].to_vec())
}

/// `∂(−I*)/∂cᵢ` over all coefficients of the dual field `y`.
pub fn assemble_dual_gradient(y: &FeField, data: &ProblemData) -> Result<Vec<f64>> {
    if y.dirichlet_zero() {
        return Err(Error::InvalidField(
            "dual field must not carry a zero-trace constraint".into(),
        ));
    }
    data.check_coefficients(y.mesh())?;
    Ok(neg_dual_gradient(y, data))
}
