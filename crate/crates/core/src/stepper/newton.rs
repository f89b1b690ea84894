//! Newton's method with a finite-difference Jacobian and dense LU.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::norm_inf;

/// How the Jacobian is refreshed during one solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// Rebuilt at every iteration (full Newton).
    FiniteDifference,
    /// Built once per solve and reused (chord iteration); rebuilt only if
    /// the residual stops contracting.
    ReusePerInterval,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Tolerance on the residual ∞-norm.
    pub abs_tol: f64,
    pub max_iters: usize,
    pub jacobian_mode: JacobianMode,
    /// Relative FD step; column `i` is perturbed by `fd_step * (1 + |x_i|)`
    /// (rounded to a power of two).
    pub fd_step: f64,
    /// When set, [`step_interval`](super::step_interval) tightens the
    /// tolerance to `abs_tol * min(1, |u_prev|_∞)` so that states far below
    /// unit size are resolved to the same relative accuracy.
    pub state_relative: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iters: 50,
            jacobian_mode: JacobianMode::FiniteDifference,
            fd_step: 1e-7,
            state_relative: false,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("Newton tolerance must be positive".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("Newton needs at least one iteration".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub iters: usize,
    pub residual_norm: f64,
}

/// Contraction factor above which the chord iteration refreshes its Jacobian.
const CHORD_STALL: f64 = 0.5;
/// Pivots below this fraction of the largest Jacobian entry count as singular.
const PIVOT_TOL: f64 = 1e-14;

type Factorization = nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>;

fn fd_jacobian<F>(residual: &F, x: &[f64], r0: &[f64], fd_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut xp = x.to_vec();
            // power-of-two step: x + h and the residual difference stay exact
            // for affine maps
            let h = (fd_step * (1.0 + x[i].abs())).log2().round().exp2();
            xp[i] += h;
            let h = xp[i] - x[i];
            let rp = residual(&xp)?;
            Ok(rp.iter().zip(r0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(r0.len(), n, |i, j| columns[j][i]))
}

fn factor(jac: DMatrix<f64>) -> Result<Factorization> {
    let scale = jac.amax();
    let lu = jac.lu();
    let pivot = lu.u().diagonal().amin();
    if !(pivot > PIVOT_TOL * scale) {
        return Err(Error::SingularJacobian { pivot, scale });
    }
    Ok(lu)
}

/// Solves `residual(x) = 0` starting from `x0`.
pub fn newton_solve<F>(residual: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    opts.validate()?;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    if r.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: r.len(),
        });
    }
    let mut norm = norm_inf(&r);
    let mut lu: Option<Factorization> = None;
    let mut iters = 0;
    loop {
        if !norm.is_finite() {
            return Err(Error::NonConvergence { iters, residual: norm });
        }
        if norm <= opts.abs_tol {
            return Ok(NewtonReport {
                x,
                iters,
                residual_norm: norm,
            });
        }
        if iters == opts.max_iters {
            return Err(Error::NonConvergence { iters, residual: norm });
        }
        if opts.jacobian_mode == JacobianMode::FiniteDifference || lu.is_none() {
            lu = Some(factor(fd_jacobian(&residual, &x, &r, opts.fd_step)?)?);
        }
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let dx = lu
            .as_ref()
            .and_then(|f| f.solve(&rhs))
            .ok_or(Error::SingularJacobian { pivot: 0.0, scale: 0.0 })?;
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
        iters += 1;
        let prev = norm;
        r = residual(&x)?;
        norm = norm_inf(&r);
        if opts.jacobian_mode == JacobianMode::ReusePerInterval && norm > CHORD_STALL * prev {
            lu = None;
        }
    }
}
