//! Discontinuous Galerkin time stepping for `u' = L(u) p`, `p = ∇E(u)`.
//!
//! On each interval `J_n` both `u` and `p` are polynomials of degree `k`,
//! stored as values at the Gauss–Lobatto nodes of `[0, 1]`. The unknowns of
//! one interval are laid out as
//!
//! ```text
//! [u_0, .., u_k, p_0, .., p_k]      each block of length d
//! ```
//!
//! and the residual as `[R1_0, .., R1_k, R2_0, .., R2_{k-1}, R3]`:
//!
//! - `R1_j`: `∫ <u', ℓ_j e_i> + <u^{n-1,+} - u^{n-1}, e_i> ℓ_j(0) - ∫ <L(u) p, ℓ_j e_i>`
//! - `R2_j`: `∫ (<p, e_i> - <∇E(u), e_i>) ψ_j`, with `ψ_j` the degree `k-1`
//!   Lagrange cardinals on the `k` Gauss nodes
//! - `R3`: `<p^{n-1,+}, e_i> - <∇_d E(u^{n-1,+}, u^{n-1}), e_i>`
//!
//! Testing `R1` with `p` and `R2` with `u'` (both evaluated by the same
//! quadrature) gives the discrete energy identity checked by
//! [`energy_identity_residual`].

mod newton;

pub use newton::{newton_solve, JacobianMode, NewtonOptions, NewtonReport};

use crate::dgrad::DiscreteGradient;
use crate::error::{check_dim, Error, Result};
use crate::polybasis::{gauss_legendre, lobatto_nodes, NodalBasis, QuadratureRule};
use crate::system::{dot, GradientSystem, StateVector};

/// Strictly increasing node times `0 = t_0 < t_1 < .. < t_N = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMesh {
    nodes: Vec<f64>,
}

impl TimeMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("time mesh needs at least one interval".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidArgument("time mesh must start at 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidArgument("time mesh must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// `t_n = n T / N`.
    pub fn uniform(final_time: f64, intervals: usize) -> Result<Self> {
        if intervals < 1 || !(final_time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform mesh needs T > 0 and N >= 1, got T={final_time}, N={intervals}"
            )));
        }
        let tau = final_time / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|n| n as f64 * tau).collect();
        nodes[intervals] = final_time;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Length of `J_n`, `n` one-based.
    pub fn tau(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    pub fn max_tau(&self) -> f64 {
        (1..=self.intervals()).map(|n| self.tau(n)).fold(0.0, f64::max)
    }

    /// One-based index `n` with `t ∈ (t_{n-1}, t_n]`; `t = 0` maps to 1.
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !(t >= 0.0 && t <= self.final_time()) {
            return None;
        }
        Some(self.nodes.partition_point(|&tn| tn < t).max(1))
    }
}

/// Reference-interval tables shared by every interval of a run.
#[derive(Clone, Debug)]
pub struct DgScheme {
    degree: usize,
    basis: NodalBasis,
    quad: QuadratureRule,
    // per quadrature point: trial values, trial derivatives, test values
    ell: Vec<Vec<f64>>,
    dell: Vec<Vec<f64>>,
    psi: Vec<Vec<f64>>,
    // trial values at s = 0 (right limit at t_{n-1})
    ell0: Vec<f64>,
}

impl DgScheme {
    /// Degree-`k` scheme with the default `2k + 1` point quadrature.
    pub fn new(degree: usize) -> Result<Self> {
        Self::with_quadrature(degree, 2 * degree + 1)
    }

    pub fn with_quadrature(degree: usize, quad_points: usize) -> Result<Self> {
        let basis = lobatto_nodes(degree);
        let quad = gauss_legendre(quad_points)?;
        let test = if degree > 0 {
            Some(NodalBasis::with_nodes(gauss_legendre(degree)?.nodes().to_vec())?)
        } else {
            None
        };
        let ell = quad.nodes().iter().map(|&s| basis.eval(s)).collect();
        let dell = quad.nodes().iter().map(|&s| basis.deriv(s)).collect();
        let psi = quad
            .nodes()
            .iter()
            .map(|&s| test.as_ref().map(|b| b.eval(s)).unwrap_or_default())
            .collect();
        let ell0 = basis.eval(0.0);
        Ok(Self {
            degree,
            basis,
            quad,
            ell,
            dell,
            psi,
            ell0,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &NodalBasis {
        &self.basis
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    /// Number of unknowns of one interval for a `dim`-dimensional problem.
    pub fn unknowns(&self, dim: usize) -> usize {
        2 * (self.degree + 1) * dim
    }
}

/// `Σ_m w_m x_m` over the `d`-blocks of `blocks`, for weights summing to 1.
///
/// Computed as `x_0 + Σ_m w_m (x_m - x_0)` so constant data is reproduced
/// exactly.
fn combine(weights: &[f64], blocks: &[f64], d: usize) -> Vec<f64> {
    let base = &blocks[..d];
    let mut out = base.to_vec();
    for (m, w) in weights.iter().enumerate().skip(1) {
        if *w == 0.0 {
            continue;
        }
        for ((o, x), b) in out.iter_mut().zip(&blocks[m * d..(m + 1) * d]).zip(base) {
            *o += w * (x - b);
        }
    }
    out
}

/// `Σ_m w_m x_m` for derivative weights summing to 0.
fn combine_deriv(weights: &[f64], blocks: &[f64], d: usize) -> Vec<f64> {
    let base = &blocks[..d];
    let mut out = vec![0.0; d];
    for (m, w) in weights.iter().enumerate().skip(1) {
        for ((o, x), b) in out.iter_mut().zip(&blocks[m * d..(m + 1) * d]).zip(base) {
            *o += w * (x - b);
        }
    }
    out
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Stacked residual of one interval; see the module docs for the layout.
pub fn assemble_residual<P: GradientSystem + ?Sized>(
    problem: &P,
    dgrad: DiscreteGradient,
    u_prev: &[f64],
    coeffs: &[f64],
    tau: f64,
    scheme: &DgScheme,
) -> Result<Vec<f64>> {
    let d = problem.dim();
    let k = scheme.degree;
    check_dim(d, u_prev.len())?;
    check_dim(scheme.unknowns(d), coeffs.len())?;
    let (u, p) = coeffs.split_at((k + 1) * d);

    let mut res = vec![0.0; scheme.unknowns(d)];
    let (r1, rest) = res.split_at_mut((k + 1) * d);
    let (r2, r3) = rest.split_at_mut(k * d);

    for (q, (_, w)) in scheme.quad.iter().enumerate() {
        let uq = combine(&scheme.ell[q], u, d);
        let pq = combine(&scheme.ell[q], p, d);
        // (d/dt) u = (1/tau) (d/ds) u, and dt = tau ds: the factors cancel
        let g_du = problem.gram_apply(&combine_deriv(&scheme.dell[q], u, d));
        let lp = problem.op_weak(&uq, &pq)?;
        check_dim(d, lp.len())?;
        let flux: Vec<f64> = g_du.iter().zip(&lp).map(|(a, b)| w * (a - tau * b)).collect();
        for (j, lj) in scheme.ell[q].iter().enumerate() {
            axpy(&mut r1[j * d..(j + 1) * d], *lj, &flux);
        }
        if k > 0 {
            let gp = problem.gram_apply(&pq);
            let grad = problem.grad_weak(&uq)?;
            check_dim(d, grad.len())?;
            let mismatch: Vec<f64> = gp.iter().zip(&grad).map(|(a, b)| w * tau * (a - b)).collect();
            for (j, pj) in scheme.psi[q].iter().enumerate() {
                axpy(&mut r2[j * d..(j + 1) * d], *pj, &mismatch);
            }
        }
    }

    let u_plus = combine(&scheme.ell0, u, d);
    let jump: Vec<f64> = u_plus.iter().zip(u_prev).map(|(a, b)| a - b).collect();
    let g_jump = problem.gram_apply(&jump);
    for (j, lj) in scheme.ell0.iter().enumerate() {
        axpy(&mut r1[j * d..(j + 1) * d], *lj, &g_jump);
    }

    let p_plus = combine(&scheme.ell0, p, d);
    let g_p = problem.gram_apply(&p_plus);
    let dg = dgrad.weak(problem, &u_plus, u_prev)?;
    for ((r, a), b) in r3.iter_mut().zip(&g_p).zip(&dg) {
        *r = a - b;
    }
    Ok(res)
}

/// Solution of one interval.
#[derive(Clone, Debug)]
pub struct IntervalSolution {
    /// `u` at the Lobatto nodes; `u_coeffs[k]` is `u^n`, and for `k >= 1`
    /// `u_coeffs[0]` is `u^{n-1,+}`.
    pub u_coeffs: Vec<StateVector>,
    pub p_coeffs: Vec<StateVector>,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

impl IntervalSolution {
    /// Nodal value `u^n` at the right end of the interval.
    pub fn end_value(&self) -> &StateVector {
        self.u_coeffs.last().expect("at least one coefficient")
    }
}

/// Advances one interval of length `tau` from `u_prev`.
pub fn step_interval<P: GradientSystem + ?Sized>(
    problem: &P,
    dgrad: DiscreteGradient,
    u_prev: &[f64],
    tau: f64,
    scheme: &DgScheme,
    opts: &NewtonOptions,
) -> Result<IntervalSolution> {
    let d = problem.dim();
    check_dim(d, u_prev.len())?;
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("interval length must be positive, got {tau}")));
    }
    let k = scheme.degree;
    // predictor: u ≡ u_prev, p ≡ G^{-1} <∇E(u_prev), e_i>
    let p0 = problem.gram_solve(&problem.grad_weak(u_prev)?)?;
    let mut x0 = Vec::with_capacity(scheme.unknowns(d));
    for _ in 0..=k {
        x0.extend_from_slice(u_prev);
    }
    for _ in 0..=k {
        x0.extend_from_slice(&p0);
    }
    let mut opts = *opts;
    if opts.state_relative {
        let size = u_prev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if size > 0.0 {
            opts.abs_tol *= size.min(1.0);
        }
    }
    let report = newton_solve(
        |x: &[f64]| assemble_residual(problem, dgrad, u_prev, x, tau, scheme),
        &x0,
        &opts,
    )?;
    let (u, p) = report.x.split_at((k + 1) * d);
    let blocks = |v: &[f64]| -> Result<Vec<StateVector>> {
        v.chunks(d).map(|c| StateVector::new(c.to_vec())).collect()
    };
    Ok(IntervalSolution {
        u_coeffs: blocks(u)?,
        p_coeffs: blocks(p)?,
        newton_iters: report.iters,
        residual_norm: report.residual_norm,
    })
}

/// The piecewise-polynomial pair `(u_τ, p_τ)` over a whole mesh.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub mesh: TimeMesh,
    pub scheme: DgScheme,
    pub u0: StateVector,
    pub intervals: Vec<IntervalSolution>,
}

impl Trajectory {
    pub fn degree(&self) -> usize {
        self.scheme.degree
    }

    /// `u^n` for `n = 0..=N`.
    pub fn nodal_value(&self, n: usize) -> &StateVector {
        if n == 0 {
            &self.u0
        } else {
            self.intervals[n - 1].end_value()
        }
    }

    /// `(u_τ(t), p_τ(t))`, left-continuous at mesh nodes. At `t = 0` this
    /// returns `u_0` together with `p^{0,+}`.
    pub fn evaluate(&self, t: f64) -> Result<(StateVector, StateVector)> {
        let n = self
            .mesh
            .locate(t)
            .ok_or_else(|| Error::Domain(format!("t = {t} outside [0, {}]", self.mesh.final_time())))?;
        let interval = &self.intervals[n - 1];
        let s = (t - self.mesh.nodes()[n - 1]) / self.mesh.tau(n);
        let weights = if t == 0.0 { self.scheme.basis.eval(0.0) } else { self.scheme.basis.eval(s) };
        let mix = |blocks: &[StateVector]| -> Vec<f64> {
            let mut out = vec![0.0; self.u0.len()];
            for (w, b) in weights.iter().zip(blocks) {
                axpy(&mut out, *w, b);
            }
            out
        };
        let u = if t == 0.0 { self.u0.clone() } else { StateVector::new(mix(&interval.u_coeffs))? };
        let p = StateVector::new(mix(&interval.p_coeffs))?;
        Ok((u, p))
    }

    /// Total Newton iterations across all intervals.
    pub fn newton_iters(&self) -> usize {
        self.intervals.iter().map(|i| i.newton_iters).sum()
    }
}

/// Runs the scheme over `mesh` with the default quadrature for degree `k`.
pub fn integrate<P: GradientSystem + ?Sized>(
    problem: &P,
    dgrad: DiscreteGradient,
    u0: &StateVector,
    mesh: &TimeMesh,
    k: usize,
    opts: &NewtonOptions,
) -> Result<Trajectory> {
    integrate_with(problem, dgrad, u0, mesh, &DgScheme::new(k)?, opts)
}

pub fn integrate_with<P: GradientSystem + ?Sized>(
    problem: &P,
    dgrad: DiscreteGradient,
    u0: &StateVector,
    mesh: &TimeMesh,
    scheme: &DgScheme,
    opts: &NewtonOptions,
) -> Result<Trajectory> {
    check_dim(problem.dim(), u0.len())?;
    let mut intervals: Vec<IntervalSolution> = Vec::with_capacity(mesh.intervals());
    for n in 1..=mesh.intervals() {
        let prev = intervals.last().map(|s| s.end_value()).unwrap_or(u0);
        let sol = step_interval(problem, dgrad, prev, mesh.tau(n), scheme, opts).map_err(|e| {
            Error::IntervalFailed {
                interval: n,
                source: Box::new(e),
            }
        })?;
        intervals.push(sol);
    }
    Ok(Trajectory {
        mesh: mesh.clone(),
        scheme: scheme.clone(),
        u0: u0.clone(),
        intervals,
    })
}

/// `Q_n(<L(u_τ) p_τ, p_τ>)`, the rate term of the energy identity on `J_n`
/// evaluated with the scheme's own quadrature.
pub fn energy_rate_integral<P: GradientSystem + ?Sized>(
    problem: &P,
    traj: &Trajectory,
    n: usize,
) -> Result<f64> {
    let interval = traj
        .intervals
        .get(n.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidArgument(format!("interval {n} out of range")))?;
    let d = problem.dim();
    let flat = |b: &[StateVector]| -> Vec<f64> { b.iter().flat_map(|v| v.iter().copied()).collect() };
    let (u, p) = (flat(&interval.u_coeffs), flat(&interval.p_coeffs));
    let tau = traj.mesh.tau(n);
    let mut total = 0.0;
    for (q, (_, w)) in traj.scheme.quad.iter().enumerate() {
        let uq = combine(&traj.scheme.ell[q], &u, d);
        let pq = combine(&traj.scheme.ell[q], &p, d);
        total += w * tau * dot(&problem.op_weak(&uq, &pq)?, &pq);
    }
    Ok(total)
}

/// `|E[u^n] - E[u^{n-1}] - Q_n(<L(u_τ) p_τ, p_τ>)|` for one-based `n`.
pub fn energy_identity_residual<P: GradientSystem + ?Sized>(
    problem: &P,
    traj: &Trajectory,
    n: usize,
) -> Result<f64> {
    let rate = energy_rate_integral(problem, traj, n)?;
    let change = problem.energy(traj.nodal_value(n))? - problem.energy(traj.nodal_value(n - 1))?;
    Ok((change - rate).abs())
}
