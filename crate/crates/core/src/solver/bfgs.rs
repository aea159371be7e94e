//! Dense BFGS with backtracking Armijo line search.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Sufficient-decrease constant `c₁ ∈ (0, 1)`.
    pub c1: f64,
    /// Step reduction factor in `(0, 1)`.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once `‖∇‖∞ ≤ grad_tolerance · (1 + |objective|)`.
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    pub line_search: LineSearch,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grad_tolerance: 1e-9,
            max_iterations: 5000,
            line_search: LineSearch::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        if !(self.grad_tolerance > 0.0 && self.grad_tolerance.is_finite()) {
            return Err(Error::InvalidOptions(
                "grad_tolerance must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(ls.c1 > 0.0 && ls.c1 < 1.0) || !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return Err(Error::InvalidOptions(
                "line search needs c1 and shrink in (0, 1)".into(),
            ));
        }
        if ls.max_backtracks == 0 {
            return Err(Error::InvalidOptions(
                "max_backtracks must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub threshold: f64,
    pub converged: bool,
    pub line_search_failed: bool,
    /// Objective value after each accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `objective`, which returns the value and gradient at a point.
pub fn minimize<F>(x0: Vec<f64>, mut objective: F, opts: &SolveOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    opts.validate()?;
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = objective(&x)?;
    let mut history = vec![fx];
    if n == 0 {
        return Ok(Minimum {
            x,
            value: fx,
            iterations: 0,
            grad_norm: 0.0,
            threshold: opts.grad_tolerance * (1.0 + fx.abs()),
            converged: true,
            line_search_failed: false,
            history,
        });
    }

    // row-major inverse Hessian approximation
    let mut h = identity(n);
    let mut scaled = false;
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let ls = opts.line_search;

    let mut iterations = 0;
    let mut line_search_failed = false;
    loop {
        let grad_norm = sup_norm(&g);
        let threshold = opts.grad_tolerance * (1.0 + fx.abs());
        if grad_norm <= threshold || iterations >= opts.max_iterations || line_search_failed {
            return Ok(Minimum {
                x,
                value: fx,
                iterations,
                grad_norm,
                threshold,
                converged: grad_norm <= threshold,
                line_search_failed,
                history,
            });
        }
        iterations += 1;

        mat_vec(&h, &g, &mut d);
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h = identity(n);
            scaled = false;
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = dot(&g, &d);
        }

        // Rounding in the quadrature sums bounds how precisely a decrease
        // can be detected.
        let noise = 64.0 * f64::EPSILON * (1.0 + fx.abs());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..ls.max_backtracks {
            for i in 0..n {
                x_new[i] = x[i] + alpha * d[i];
            }
            let (f_new, g_new) = objective(&x_new)?;
            if f_new.is_finite() && f_new <= fx + ls.c1 * alpha * slope + noise {
                accepted = Some((f_new, g_new));
                break;
            }
            alpha *= ls.shrink;
        }
        let Some((f_new, g_new)) = accepted else {
            line_search_failed = true;
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        let yy = dot(&yv, &yv);
        if sy > 1e-12 * sup_norm(&s) * sup_norm(&yv) * (n as f64).sqrt() && sy > 0.0 {
            if !scaled {
                let gamma = sy / yy;
                h.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    h[i * n + i] = gamma;
                }
                scaled = true;
            }
            bfgs_update(&mut h, &s, &yv, sy, &mut hy);
        }

        x.copy_from_slice(&x_new);
        fx = f_new;
        g = g_new;
        history.push(fx);
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(&h[i * n..(i + 1) * n], v);
    }
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, hy: &mut [f64]) {
    let n = s.len();
    mat_vec(h, y, hy);
    let rho = 1.0 / sy;
    let yhy = dot(y, hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        let row = &mut h[i * n..(i + 1) * n];
        let (si, hyi) = (s[i], hy[i]);
        for j in 0..n {
            row[j] += coef * si * s[j] - rho * (si * hy[j] + hyi * s[j]);
        }
    }
}
