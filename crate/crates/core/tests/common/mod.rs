//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics beyond the trait being implemented.
#![allow(dead_code)]

use dgstep::{GradientSystem, OpStructure, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Chain of double wells:
/// `E = Σ (1 - u_i²)² / 4 + Σ (u_{i+1} - u_i)² / 2`, identity Gram, `L = -I`.
#[derive(Clone, Copy, Debug)]
pub struct QuarticChain {
    pub dim: usize,
}

impl QuarticChain {
    pub fn energy_of(u: &[f64]) -> f64 {
        let wells: f64 = u.iter().map(|x| 0.25 * (1.0 - x * x).powi(2)).sum();
        let springs: f64 = u.windows(2).map(|w| 0.5 * (w[1] - w[0]).powi(2)).sum();
        wells + springs
    }

    pub fn grad_of(u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| {
                let mut g = u[i] * u[i] * u[i] - u[i];
                if i > 0 {
                    g += u[i] - u[i - 1];
                }
                if i + 1 < n {
                    g -= u[i + 1] - u[i];
                }
                g
            })
            .collect()
    }
}

impl GradientSystem for QuarticChain {
    fn dim(&self) -> usize {
        self.dim
    }
    fn gram_apply(&self, a: &[f64]) -> Vec<f64> {
        a.to_vec()
    }
    fn gram_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(rhs.to_vec())
    }
    fn energy(&self, u: &[f64]) -> Result<f64> {
        Ok(Self::energy_of(u))
    }
    fn grad_weak(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(Self::grad_of(u))
    }
    fn op_weak(&self, _u: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        Ok(p.iter().map(|x| -x).collect())
    }
    /// Exact path average of the gradient: the well part integrates to the
    /// cubic secant form, the spring part to the midpoint gradient.
    fn dgrad_weak(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let mut g = Self::grad_of(&mid);
        for i in 0..a.len() {
            let (x, y) = (a[i], b[i]);
            let well_mid = mid[i] * mid[i] * mid[i] - mid[i];
            let well_avf = (x * x * x + x * x * y + x * y * y + y * y * y) / 4.0 - (x + y) / 2.0;
            g[i] += well_avf - well_mid;
        }
        Ok(g)
    }
    fn op_structure(&self) -> OpStructure {
        OpStructure::NegativeSemidefinite
    }
    /// Factored differences: `x² - y² = (x - y)(x + y)` termwise.
    fn energy_difference(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let wells: f64 = a.iter().zip(b).map(|(x, y)| 0.25 * (y - x) * (y + x) * (2.0 - x * x - y * y)).sum();
        let springs: f64 = a
            .windows(2)
            .zip(b.windows(2))
            .map(|(p, q)| {
                let (dp, dq) = (p[1] - p[0], q[1] - q[0]);
                0.5 * ((p[1] - q[1]) - (p[0] - q[0])) * (dp + dq)
            })
            .sum();
        Ok(wells + springs)
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 20)
}

/// `K(m) = ∫_0^{π/2} (1 - m sin²θ)^{-1/2} dθ`. The integrand is smooth and
/// π-periodic, so the trapezoidal rule over a full period converges
/// geometrically.
pub fn elliptic_k_oracle(m: f64) -> f64 {
    let n = 8192;
    let h = std::f64::consts::PI / n as f64;
    let sum: f64 = (0..n).map(|i| 1.0 / (1.0 - m * (i as f64 * h).sin().powi(2)).sqrt()).sum();
    0.5 * h * sum
}

/// `(sn, cn, dn)(x | m)` by classical RK4 on
/// `sn' = cn dn`, `cn' = -sn dn`, `dn' = -m sn cn` from `(0, 1, 1)`.
pub fn jacobi_oracle(x: f64, m: f64, steps: usize) -> (f64, f64, f64) {
    let rhs = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -m * y[0] * y[1]];
    let h = x / steps as f64;
    let mut y = [0.0, 1.0, 1.0];
    let add = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, 0.5 * h));
        let k3 = rhs(add(y, k2, 0.5 * h));
        let k4 = rhs(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1], y[2])
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn composite_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h)).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

/// Secant slope of the double-well energy.
pub fn double_well_secant(u: f64, v: f64) -> f64 {
    let e = |x: f64| 0.25 * (1.0 - x * x).powi(2);
    if u == v {
        u * u * u - u
    } else {
        (e(v) - e(u)) / (v - u)
    }
}

/// One step of the classical discrete gradient method
/// `(u_new - u) / τ = -∇_d E(u, u_new)` for the double-well ODE, solved by
/// a safeguarded scalar Newton iteration on the factored cubic.
pub fn classical_dg_step(u: f64, tau: f64) -> f64 {
    // g(v) = v - u + τ [(u³ + u²v + uv² + v³)/4 - (u + v)/2]
    let g = |v: f64| v - u + tau * ((u * u * u + u * u * v + u * v * v + v * v * v) / 4.0 - (u + v) / 2.0);
    let dg = |v: f64| 1.0 + tau * ((u * u + 2.0 * u * v + 3.0 * v * v) / 4.0 - 0.5);
    let mut v = u;
    for _ in 0..200 {
        let step = g(v) / dg(v);
        v -= step;
        if step.abs() <= 1e-17 * (1.0 + v.abs()) {
            break;
        }
    }
    v
}

/// `u(t)` for `u' = u - u³`, written independently of the library.
pub fn ode_exact(u0: f64, t: f64) -> f64 {
    let e = (2.0 * t).exp();
    u0 * e.sqrt() / (1.0 + u0 * u0 * (e - 1.0)).sqrt()
}

/// Least-squares slope of `log2 e` against level index (halvings).
pub fn ls_order(errors: &[f64]) -> f64 {
    let n = errors.len() as f64;
    let xs: Vec<f64> = (0..errors.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

/// Smooth random periodic state: a few low Fourier modes sampled at the
/// nodes `x_g = g L / dof`.
pub fn smooth_periodic(rng: &mut ChaCha8Rng, dof: usize, amplitude: f64) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (1..=3)
        .map(|j| (j as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mean: f64 = rng.gen_range(-0.5..0.5);
    (0..dof)
        .map(|g| {
            let th = 2.0 * std::f64::consts::PI * g as f64 / dof as f64;
            mean + amplitude * modes.iter().map(|(j, a, b)| a * (j * th).cos() + b * (j * th).sin()).sum::<f64>() / 3.0
        })
        .collect()
}
