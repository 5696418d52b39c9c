//! Gauss quadrature rules.
//!
//! Legendre nodes come from Newton iteration on the three-term recurrence.
//! Laguerre and Jacobi rules come from the Golub-Welsch eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::log_gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Affine map of a rule on [-1, 1] onto [a, b].
    pub fn on_interval(&self, a: f64, b: f64) -> GaussRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        GaussRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::domain("gauss_legendre", "need at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        if n == 1 {
            x = 0.0;
        }
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            if n == 1 {
                break;
            }
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = if n == 1 { 2.0 } else { 2.0 / ((1.0 - x * x) * dp * dp) };
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(GaussRule { nodes, weights })
}

fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], mu0 * eig.eigenvectors[(0, j)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// n-point generalized Gauss-Laguerre rule for the weight `x^alpha e^-x` on [0, inf).
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<GaussRule> {
    if n == 0 || !(alpha > -1.0) {
        return Err(Error::domain("gauss_laguerre", format!("n = {n}, alpha = {alpha}")));
    }
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + alpha)).sqrt()).collect();
    let mut rule = golub_welsch(&diag, &off, log_gamma(alpha + 1.0)?.exp());
    // Christoffel weights 1 / sum_k p_k(x)^2 with orthonormal p_k: keeps full
    // relative accuracy for the tiny far-tail weights.
    let p0 = (-0.5 * log_gamma(alpha + 1.0)?).exp();
    for (&x, w) in rule.nodes.iter().zip(rule.weights.iter_mut()) {
        let (mut prev, mut cur) = (0.0, p0);
        let mut sum = p0 * p0;
        for k in 0..n - 1 {
            let b_next = off[k];
            let b_cur = if k == 0 { 0.0 } else { off[k - 1] };
            let next = ((x - diag[k]) * cur - b_cur * prev) / b_next;
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        *w = 1.0 / sum;
    }
    Ok(rule)
}

/// n-point Gauss-Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on [-1, 1].
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 || !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::domain(
            "gauss_jacobi",
            format!("n = {n}, alpha = {alpha}, beta = {beta}"),
        ));
    }
    let ab = alpha + beta;
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                let s = 2.0 * k as f64 + ab;
                (beta * beta - alpha * alpha) / (s * (s + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            if k == 1 {
                (4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))).sqrt()
            } else {
                (4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            }
        })
        .collect();
    let mu0 = ((ab + 1.0) * 2f64.ln() + log_gamma(alpha + 1.0)? + log_gamma(beta + 1.0)? - log_gamma(ab + 2.0)?).exp();
    Ok(golub_welsch(&diag, &off, mu0))
}
