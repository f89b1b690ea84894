use crate::error::{check_dim, Error, Result};
use crate::system::{GradientSystem, OpStructure};

/// `u' = u - u^3 = -f'(u)` with `f(u) = (1 - u^2)^2 / 4`, `L = -1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarOdeProblem;

/// `(u^3 + u^2 v + u v^2 + v^3) / 4 - (u + v) / 2`, the common value of all
/// three classical discrete gradients for the double-well energy.
pub fn scalar_dgrad_closed(u: f64, v: f64) -> f64 {
    (u * u * u + u * u * v + u * v * v + v * v * v) / 4.0 - (u + v) / 2.0
}

/// `u(t) = u0 / sqrt((1 - e^{-2t}) u0^2 + e^{-2t})` for `u0 > 0`.
pub fn scalar_ode_exact(u0: f64, t: f64) -> Result<f64> {
    if !(u0 > 0.0) {
        return Err(Error::Domain(format!("exact solution needs u0 > 0, got {u0}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("exact solution needs t >= 0, got {t}")));
    }
    let decay = (-2.0 * t).exp();
    // 1 - e^{-2t} without cancellation for small t
    let growth = -(-2.0 * t).exp_m1();
    Ok(u0 / (growth * u0 * u0 + decay).sqrt())
}

impl ScalarOdeProblem {
    pub fn energy_value(u: f64) -> f64 {
        let a = 1.0 - u * u;
        0.25 * a * a
    }

    pub fn grad_value(u: f64) -> f64 {
        u * u * u - u
    }
}

impl GradientSystem for ScalarOdeProblem {
    fn dim(&self) -> usize {
        1
    }

    fn gram_apply(&self, a: &[f64]) -> Vec<f64> {
        a.to_vec()
    }

    fn gram_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_dim(1, rhs.len())?;
        Ok(rhs.to_vec())
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        check_dim(1, u.len())?;
        Ok(Self::energy_value(u[0]))
    }

    fn grad_weak(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(1, u.len())?;
        Ok(vec![Self::grad_value(u[0])])
    }

    fn op_weak(&self, _u_ctx: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        check_dim(1, p.len())?;
        Ok(vec![-p[0]])
    }

    fn dgrad_weak(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_dim(1, a.len())?;
        check_dim(1, b.len())?;
        Ok(vec![scalar_dgrad_closed(a[0], b[0])])
    }

    fn op_structure(&self) -> OpStructure {
        OpStructure::NegativeSemidefinite
    }

    /// `(b - a)(b + a)(2 - a² - b²) / 4`.
    fn energy_difference(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim(1, a.len())?;
        check_dim(1, b.len())?;
        let (x, y) = (a[0], b[0]);
        Ok(0.25 * (y - x) * (y + x) * (2.0 - x * x - y * y))
    }
}
