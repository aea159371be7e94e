//! Continuous Lagrange P1/P2 fields on a [`Mesh1D`].
//!
//! Global numbering: for P1 the coefficient `i` is the value at vertex `i`.
//! For P2 the coefficient `2i` is the value at vertex `i` and `2i + 1` the
//! value at the midpoint of element `i`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn from_order(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Degree::P1),
            2 => Ok(Degree::P2),
            _ => Err(Error::InvalidField(format!(
                "degree must be 1 or 2, got {k}"
            ))),
        }
    }

    pub fn order(self) -> usize {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }

    /// Number of global coefficients on a mesh with `n` elements.
    pub fn n_dofs(self, n_elements: usize) -> usize {
        n_elements * self.order() + 1
    }

    /// Local basis values at reference coordinate `xi`.
    #[inline]
    pub fn basis(self, xi: f64) -> [f64; 3] {
        match self {
            Degree::P1 => [0.5 * (1.0 - xi), 0.5 * (1.0 + xi), 0.0],
            Degree::P2 => [0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)],
        }
    }

    /// Local basis derivatives with respect to `xi`.
    #[inline]
    pub fn basis_deriv(self, xi: f64) -> [f64; 3] {
        match self {
            Degree::P1 => [-0.5, 0.5, 0.0],
            Degree::P2 => [xi - 0.5, -2.0 * xi, xi + 0.5],
        }
    }

    pub fn n_local(self) -> usize {
        self.order() + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeField {
    mesh: Arc<Mesh1D>,
    degree: Degree,
    coefficients: Vec<f64>,
    dirichlet_zero: bool,
}

impl FeField {
    pub fn new(
        mesh: Arc<Mesh1D>,
        degree: Degree,
        coefficients: Vec<f64>,
        dirichlet_zero: bool,
    ) -> Result<Self> {
        let n = degree.n_dofs(mesh.n_elements());
        if coefficients.len() != n {
            return Err(Error::InvalidField(format!(
                "expected {n} coefficients, got {}",
                coefficients.len()
            )));
        }
        if dirichlet_zero && (coefficients[0] != 0.0 || coefficients[n - 1] != 0.0) {
            return Err(Error::InvalidField(
                "zero-trace field must vanish at both endpoints".into(),
            ));
        }
        Ok(Self {
            mesh,
            degree,
            coefficients,
            dirichlet_zero,
        })
    }

    pub fn zeros(mesh: Arc<Mesh1D>, degree: Degree, dirichlet_zero: bool) -> Self {
        let n = degree.n_dofs(mesh.n_elements());
        Self {
            mesh,
            degree,
            coefficients: vec![0.0; n],
            dirichlet_zero,
        }
    }

    /// Nodal interpolant of `g`.
    pub fn interpolate(
        g: impl Fn(f64) -> f64,
        mesh: Arc<Mesh1D>,
        degree: Degree,
        dirichlet_zero: bool,
    ) -> Result<Self> {
        let coords = lagrange_nodes(&mesh, degree);
        let mut coefficients = Vec::with_capacity(coords.len());
        for &x in &coords {
            let value = g(x);
            if !value.is_finite() {
                return Err(Error::NonFinite { x, value });
            }
            coefficients.push(value);
        }
        if dirichlet_zero {
            let last = coefficients.len() - 1;
            coefficients[0] = 0.0;
            coefficients[last] = 0.0;
        }
        Ok(Self {
            mesh,
            degree,
            coefficients,
            dirichlet_zero,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn dirichlet_zero(&self) -> bool {
        self.dirichlet_zero
    }

    pub fn n_dofs(&self) -> usize {
        self.coefficients.len()
    }

    /// Replaces the coefficients, keeping mesh, degree and trace flag.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(
            self.mesh.clone(),
            self.degree,
            coefficients,
            self.dirichlet_zero,
        )
    }

    /// Global coefficient index of local dof `k` of element `e`.
    #[inline]
    pub fn global_index(&self, e: usize, k: usize) -> usize {
        e * self.degree.order() + k
    }

    /// Value and x-derivative at reference point `xi` of element `e`.
    #[inline]
    pub fn local(&self, e: usize, xi: f64) -> (f64, f64) {
        let (lo, hi) = self.mesh.element(e);
        let jac_inv = 2.0 / (hi - lo);
        let phi = self.degree.basis(xi);
        let dphi = self.degree.basis_deriv(xi);
        let base = e * self.degree.order();
        let mut v = 0.0;
        let mut dv = 0.0;
        for k in 0..self.degree.n_local() {
            let c = self.coefficients[base + k];
            v += c * phi[k];
            dv += c * dphi[k];
        }
        (v, dv * jac_inv)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let e = self.mesh.locate(x)?;
        Ok(self.local(e, self.mesh.to_reference(e, x)).0)
    }

    /// Derivative at `x`; at interior vertices the left element is used.
    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        let e = self.mesh.locate(x)?;
        Ok(self.local(e, self.mesh.to_reference(e, x)).1)
    }

    pub(crate) fn same_mesh(&self, other: &FeField) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }
}

/// Coordinates of the global Lagrange nodes in coefficient order.
pub fn lagrange_nodes(mesh: &Mesh1D, degree: Degree) -> Vec<f64> {
    match degree {
        Degree::P1 => mesh.nodes().to_vec(),
        Degree::P2 => {
            let mut out = Vec::with_capacity(degree.n_dofs(mesh.n_elements()));
            for e in 0..mesh.n_elements() {
                let (lo, hi) = mesh.element(e);
                out.push(lo);
                out.push(0.5 * (lo + hi));
            }
            out.push(mesh.b());
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn mesh(n: usize) -> Arc<Mesh1D> {
        Mesh1D::uniform(0.0, 1.0, n).unwrap().into_shared()
    }

    #[test]
    fn interpolation_examples() {
        let v = FeField::interpolate(|x| x * (1.0 - x), mesh(2), Degree::P1, true).unwrap();
        assert_eq!(v.coefficients(), &[0.0, 0.25, 0.0]);

        let s = FeField::interpolate(|x| (2.0 * PI * x).sin(), mesh(2), Degree::P2, false).unwrap();
        let want = [0.0, 1.0, 0.0, -1.0, 0.0];
        for (c, w) in s.coefficients().iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }

        let c = FeField::interpolate(|_| 3.0, mesh(5), Degree::P2, false).unwrap();
        assert!(c.coefficients().iter().all(|&x| x == 3.0));
    }

    #[test]
    fn interpolation_rejects_non_finite() {
        let err = FeField::interpolate(|x| 1.0 / x, mesh(2), Degree::P1, false);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn eval_examples() {
        let v = FeField::interpolate(|x| x * (1.0 - x), mesh(2), Degree::P1, true).unwrap();
        assert_relative_eq!(v.eval(0.125).unwrap(), 0.0625, epsilon = 1e-15);
        assert_relative_eq!(v.eval_deriv(0.125).unwrap(), 0.5, epsilon = 1e-15);
        let q = FeField::interpolate(|x| x * x, mesh(1), Degree::P2, false).unwrap();
        assert_relative_eq!(q.eval(0.3).unwrap(), 0.09, epsilon = 1e-15);
        assert_relative_eq!(q.eval_deriv(0.3).unwrap(), 0.6, epsilon = 1e-14);
        assert!(v.eval(1.5).is_err());
        assert!(v.eval_deriv(-0.5).is_err());
    }

    #[test]
    fn derivative_at_vertex_is_left_limit() {
        let v = FeField::interpolate(|x| x * (1.0 - x), mesh(2), Degree::P1, true).unwrap();
        assert_relative_eq!(v.eval_deriv(0.5).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coefficient_length_and_trace_are_checked() {
        assert!(FeField::new(mesh(2), Degree::P1, vec![0.0; 4], false).is_err());
        assert!(FeField::new(mesh(2), Degree::P2, vec![0.0, 1.0, 0.0, 0.0, 1.0], true).is_err());
        assert!(FeField::new(mesh(2), Degree::P2, vec![0.0, 1.0, 2.0, 1.0, 0.0], true).is_ok());
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_fe_fields(
            coeffs in prop::collection::vec(-5.0f64..5.0, 9),
            quadratic in any::<bool>(),
        ) {
            let (deg, n) = if quadratic { (Degree::P2, 4) } else { (Degree::P1, 8) };
            let f = FeField::new(mesh(n), deg, coeffs, false).unwrap();
            let g = FeField::interpolate(|x| f.eval(x).unwrap(), mesh(n), deg, false).unwrap();
            for (a, b) in f.coefficients().iter().zip(g.coefficients()) {
                prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
            }
        }

        #[test]
        fn derivative_matches_central_differences(
            coeffs in prop::collection::vec(-2.0f64..2.0, 9),
            x in 0.01f64..0.99,
        ) {
            let f = FeField::new(mesh(4), Degree::P2, coeffs, false).unwrap();
            let e = f.mesh().locate(x).unwrap();
            let (lo, hi) = f.mesh().element(e);
            // stay inside one element so the field is a single polynomial
            let step = 1e-4 * (hi - lo);
            prop_assume!(x - step > lo && x + step < hi);
            let fd = (f.eval(x + step).unwrap() - f.eval(x - step).unwrap()) / (2.0 * step);
            let d = f.eval_deriv(x).unwrap();
            // a quadratic has zero third derivative: central differences are exact up to rounding
            prop_assert!((fd - d).abs() <= 1e-7 * d.abs().max(1.0));
        }
    }
}
