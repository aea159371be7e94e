//! Direct Galerkin solve of `−(γ' u')' + γ∘ u = f`, `u = 0` on the boundary.

use std::sync::Arc;

use crate::energy::ProblemData;
use crate::error::{Error, Result};
use crate::field::{Degree, FeField};
use crate::mesh::Mesh1D;
use crate::par;

/// Symmetric banded matrix stored by rows of its lower band:
/// `band[i][k] = A[i][i − k]` for `k ≤ width`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpd {
    width: usize,
    band: Vec<Vec<f64>>,
}

impl BandedSpd {
    pub fn zeros(n: usize, width: usize) -> Self {
        Self {
            width,
            band: vec![vec![0.0; width + 1]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.band.len()
    }

    pub fn is_empty(&self) -> bool {
        self.band.is_empty()
    }

    /// Adds `value` to `A[i][j]` (and its mirror). Requires `|i − j| ≤ width`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.band[r][r - c] += value;
    }

    /// Solves `A x = b` by banded Cholesky factorisation.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let w = self.width;
        let mut l = self.band.clone();
        for j in 0..n {
            for i in j..n.min(j + w + 1) {
                let mut s = l[i][i - j];
                let k0 = i.saturating_sub(w);
                for k in k0..j {
                    s -= l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: j, pivot: s });
                    }
                    l[j][0] = s.sqrt();
                } else {
                    l[i][i - j] = s / l[j][0];
                }
            }
        }
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in i.saturating_sub(w)..i {
                s -= l[i][i - k] * z[k];
            }
            z[i] = s / l[i][0];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n.min(i + w + 1) {
                s -= l[k][k - i] * z[k];
            }
            z[i] = s / l[i][0];
        }
        Ok(z)
    }
}

/// Galerkin solution for `p = p' = 2` on `mesh` with Lagrange elements of `degree`.
pub fn solve_linear_p2(data: &ProblemData, mesh: Arc<Mesh1D>, degree: Degree) -> Result<FeField> {
    if data.p() != 2.0 || data.p_prime() != 2.0 {
        return Err(Error::InvalidData(format!(
            "direct solve needs p = p' = 2, got p = {}, p' = {}",
            data.p(),
            data.p_prime()
        )));
    }
    data.check_coefficients(&mesh)?;
    let rule = data.quadrature();
    let template = FeField::zeros(mesh.clone(), degree, true);
    let nl = degree.n_local();
    let locals = par::map_indexed(mesh.n_elements(), |e| {
        let (lo, hi) = mesh.element(e);
        let jac_inv = 2.0 / (hi - lo);
        let mut k = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for s in mesh.element_samples(e, rule) {
            let g0 = data.gamma0().eval(s.x);
            let gp = data.gamma_prime().eval(s.x);
            let f = data.load().eval(s.x);
            let phi = degree.basis(s.xi);
            let dphi = degree.basis_deriv(s.xi);
            for a in 0..nl {
                rhs[a] += s.weight * f * phi[a];
                for b in 0..nl {
                    k[a][b] += s.weight
                        * (gp * dphi[a] * dphi[b] * jac_inv * jac_inv + g0 * phi[a] * phi[b]);
                }
            }
        }
        (k, rhs)
    });

    let n_dofs = template.n_dofs();
    let n_int = n_dofs - 2;
    let mut matrix = BandedSpd::zeros(n_int, degree.order());
    let mut rhs = vec![0.0; n_int];
    for (e, (k, r)) in locals.iter().enumerate() {
        for a in 0..nl {
            let ga = template.global_index(e, a);
            if ga == 0 || ga == n_dofs - 1 {
                continue;
            }
            rhs[ga - 1] += r[a];
            for (b, &kab) in k[a].iter().enumerate().take(a + 1) {
                let gb = template.global_index(e, b);
                if gb == 0 || gb == n_dofs - 1 {
                    continue;
                }
                matrix.add(ga - 1, gb - 1, kab);
            }
        }
    }
    let interior = if n_int == 0 {
        Vec::new()
    } else {
        matrix.solve(&rhs)?
    };
    let mut coefficients = Vec::with_capacity(n_dofs);
    coefficients.push(0.0);
    coefficients.extend(interior);
    coefficients.push(0.0);
    template.with_coefficients(coefficients)
}
