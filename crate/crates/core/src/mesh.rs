use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::QuadratureRule;

/// Partition of `[a, b]` into consecutive elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// Uniform partition of `[a, b]` into `n` elements.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "non-finite endpoints [{a}, {b}]"
            )));
        }
        if a >= b {
            return Err(Error::InvalidMesh(format!("need a < b, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::InvalidMesh("element count must be positive".into()));
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        nodes[n] = b;
        Ok(Self { nodes })
    }

    /// Mesh with the given vertex coordinates.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh("at least two nodes are required".into()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMesh(
                "nodes must be strictly increasing".into(),
            ));
        }
        Ok(Self { nodes })
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Largest element length.
    pub fn h_max(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the element containing `x`. Interior vertices belong to the
    /// element on their left.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let (a, b) = (self.a(), self.b());
        if !(a..=b).contains(&x) {
            return Err(Error::OutOfDomain { x, a, b });
        }
        // first node >= x, minus one
        let idx = self.nodes.partition_point(|&n| n < x);
        Ok(idx.saturating_sub(1).min(self.n_elements() - 1))
    }

    /// Reference coordinate of `x` within element `e`.
    pub fn to_reference(&self, e: usize, x: f64) -> f64 {
        let (lo, hi) = self.element(e);
        (2.0 * x - lo - hi) / (hi - lo)
    }

    /// Quadrature points of element `e` mapped to physical coordinates.
    pub fn element_samples<'a>(
        &'a self,
        e: usize,
        rule: &'a QuadratureRule,
    ) -> impl Iterator<Item = Sample> + 'a {
        let (lo, hi) = self.element(e);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        rule.points()
            .iter()
            .zip(rule.weights())
            .map(move |(&xi, &w)| Sample {
                element: e,
                xi,
                x: mid + half * xi,
                weight: w * half,
            })
    }

    /// Sums `density` over all quadrature samples. Elements are processed
    /// in parallel; the first non-finite contribution is reported.
    pub fn integrate_samples<F>(&self, rule: &QuadratureRule, density: F) -> Result<f64>
    where
        F: Fn(&Sample) -> f64 + Sync + Send,
    {
        let per_element = par::map_indexed(self.n_elements(), |e| {
            let mut acc = 0.0;
            for s in self.element_samples(e, rule) {
                let value = density(&s);
                if !value.is_finite() {
                    return Err(Error::NonFinite { x: s.x, value });
                }
                acc += s.weight * value;
            }
            Ok(acc)
        });
        let mut total = 0.0;
        for part in per_element {
            total += part?;
        }
        Ok(total)
    }

    /// Smallest value of `g` over all quadrature points.
    pub fn min_over_samples(&self, rule: &QuadratureRule, g: impl Fn(f64) -> f64) -> f64 {
        (0..self.n_elements())
            .flat_map(|e| {
                self.element_samples(e, rule)
                    .map(|s| s.x)
                    .collect::<Vec<_>>()
            })
            .map(g)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One quadrature point: physical position, reference position inside its
/// element, and the weight already scaled by the element Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub element: usize,
    pub xi: f64,
    pub x: f64,
    pub weight: f64,
}

/// Integrates a scalar function of `x` over the mesh.
pub fn integrate<F>(integrand: F, mesh: &Mesh1D, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    mesh.integrate_samples(rule, |s| integrand(s.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_nodes() {
        assert_eq!(
            Mesh1D::uniform(0.0, 1.0, 4).unwrap().nodes(),
            &[0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(Mesh1D::uniform(0.0, 1.0, 1).unwrap().nodes(), &[0.0, 1.0]);
        assert_eq!(
            Mesh1D::uniform(-1.0, 1.0, 2).unwrap().nodes(),
            &[-1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn uniform_rejects_bad_input() {
        assert!(Mesh1D::uniform(0.0, 1.0, 0).is_err());
        assert!(Mesh1D::uniform(1.0, 1.0, 3).is_err());
        assert!(Mesh1D::uniform(f64::NAN, 1.0, 3).is_err());
        assert!(Mesh1D::uniform(0.0, f64::INFINITY, 3).is_err());
        assert!(Mesh1D::from_nodes(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn locate_uses_left_element_at_interfaces() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.locate(0.0).unwrap(), 0);
        assert_eq!(m.locate(0.25).unwrap(), 0);
        assert_eq!(m.locate(0.26).unwrap(), 1);
        assert_eq!(m.locate(1.0).unwrap(), 3);
        assert!(m.locate(1.0 + 1e-12).is_err());
        assert!(m.locate(-0.1).is_err());
    }

    #[test]
    fn integrate_examples() {
        let rule = QuadratureRule::default();
        let m = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        assert_relative_eq!(integrate(|_| 1.0, &m, &rule).unwrap(), 1.0, epsilon = 1e-15);
        let rule2 = QuadratureRule::gauss_legendre(2).unwrap();
        assert_relative_eq!(
            integrate(|x| x * x, &m, &rule2).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let m16 = Mesh1D::uniform(0.0, 1.0, 16).unwrap();
        let s = integrate(
            |x| (2.0 * std::f64::consts::PI * x).sin().powi(2),
            &m16,
            &rule,
        )
        .unwrap();
        assert!((s - 0.5).abs() < 1e-10);
    }

    #[test]
    fn integrate_reports_non_finite() {
        let m = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        let err = integrate(
            |x| 1.0 / (x - 0.5).abs().min(0.0),
            &m,
            &QuadratureRule::default(),
        );
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn exactness_on_nonuniform_mesh() {
        let m = Mesh1D::from_nodes(vec![-0.3, 0.1, 0.15, 0.9, 2.0]).unwrap();
        for n in 1..=8 {
            let rule = QuadratureRule::gauss_legendre(n).unwrap();
            for k in 0..=rule.order() {
                let got = integrate(|x| x.powi(k as i32), &m, &rule).unwrap();
                let kk = k as f64 + 1.0;
                let want = (2f64.powf(kk) - (-0.3f64).powf(kk)) / kk;
                assert!(((got - want) / want).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }
}
