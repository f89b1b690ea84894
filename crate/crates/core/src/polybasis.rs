//! Polynomial machinery on the reference interval `[0, 1]`.
//!
//! An interval `J_n = (t_{n-1}, t_n]` is mapped to `[0, 1]` by
//! `t = t_{n-1} + tau_n s`, so `d/dt = (1 / tau_n) d/ds`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const ROOT_TOL: f64 = 1e-15;
const ROOT_MAX_ITERS: usize = 100;

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_0^1 f(s) ds` approximated by the rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    /// Iterates `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1); never called at x = ±1.
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The `q`-point Gauss–Legendre rule mapped to `[0, 1]`, exact for
/// polynomials of degree `2q - 1`.
pub fn gauss_legendre(q: usize) -> Result<QuadratureRule> {
    if q < 1 {
        return Err(Error::InvalidArgument(
            "Gauss-Legendre rule needs at least one point".into(),
        ));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    // Roots are symmetric; compute the upper half on [-1, 1].
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..ROOT_MAX_ITERS {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= ROOT_TOL {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root; store in ascending order on [0, 1].
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[q - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.5;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Lagrange basis on a set of distinct nodes in `[0, 1]`.
///
/// Bases built by [`lobatto_nodes`] have their last node at 1 and, for
/// degree at least one, their first node at 0, so endpoint traces are plain
/// coefficients.
#[derive(Clone, Debug)]
pub struct NodalBasis {
    nodes: Vec<f64>,
    // 1 / prod_{m != j} (x_j - x_m)
    denom_inv: Vec<f64>,
}

impl NodalBasis {
    /// Lagrange cardinals on arbitrary distinct nodes.
    pub fn with_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("empty node set".into()));
        }
        let mut denom_inv = Vec::with_capacity(nodes.len());
        for (j, &xj) in nodes.iter().enumerate() {
            let mut d = 1.0;
            for (m, &xm) in nodes.iter().enumerate() {
                if m != j {
                    d *= xj - xm;
                }
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::InvalidArgument("nodes must be distinct".into()));
            }
            denom_inv.push(1.0 / d);
        }
        Ok(Self { nodes, denom_inv })
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all cardinal functions at `t`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|j| {
                let mut v = self.denom_inv[j];
                for (m, &xm) in self.nodes.iter().enumerate() {
                    if m != j {
                        v *= t - xm;
                    }
                }
                v
            })
            .collect()
    }

    /// Derivatives of all cardinal functions at `t`.
    pub fn deriv(&self, t: f64) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|j| {
                // product rule over the factors (t - x_m), m != j
                let mut sum = 0.0;
                for r in 0..n {
                    if r == j {
                        continue;
                    }
                    let mut prod = 1.0;
                    for (m, &xm) in self.nodes.iter().enumerate() {
                        if m != j && m != r {
                            prod *= t - xm;
                        }
                    }
                    sum += prod;
                }
                sum * self.denom_inv[j]
            })
            .collect()
    }
}

/// Gauss–Lobatto nodes of degree `k` on `[0, 1]`: `{1}` for `k = 0`, otherwise
/// both endpoints plus the roots of `P_k'`.
pub fn lobatto_nodes(k: usize) -> NodalBasis {
    let nodes = if k == 0 {
        vec![1.0]
    } else {
        let mut nodes = vec![0.0; k + 1];
        nodes[k] = 1.0;
        let kf = k as f64;
        for i in 1..k {
            // Chebyshev–Lobatto guess, refined by Newton on P_k'.
            let mut x = -(PI * i as f64 / kf).cos();
            for _ in 0..ROOT_MAX_ITERS {
                let (p, dp) = legendre(k, x);
                // (1 - x^2) P'' = 2x P' - k(k+1) P
                let ddp = (2.0 * x * dp - kf * (kf + 1.0) * p) / (1.0 - x * x);
                let dx = dp / ddp;
                x -= dx;
                if dx.abs() <= ROOT_TOL {
                    break;
                }
            }
            nodes[i] = 0.5 * (1.0 + x);
        }
        if k.is_multiple_of(2) {
            nodes[k / 2] = 0.5;
        }
        nodes
    };
    NodalBasis::with_nodes(nodes).expect("Lobatto nodes are distinct")
}

/// Convenience wrappers matching the free-function style of the rest of the crate.
pub fn basis_eval(basis: &NodalBasis, t: f64) -> Vec<f64> {
    basis.eval(t)
}

pub fn basis_deriv(basis: &NodalBasis, t: f64) -> Vec<f64> {
    basis.deriv(t)
}
