//! Discrete gradients: two-point maps `∇_d E(u, v)` with
//! `E[u] - E[v] = <∇_d E(u, v), u - v>` and `∇_d E(u, u) = ∇E(u)`.
//!
//! The free functions work on plain closures. [`DiscreteGradient`] selects a
//! construction and evaluates it in the weak form a [`GradientSystem`] uses.

use crate::error::{check_dim, check_finite, Error, Result};
use crate::polybasis::gauss_legendre;
use crate::system::{dot, GradientSystem};

/// Relative threshold below which Gonzalez falls back to `∇E(u)`.
pub const GONZALEZ_DEGENERACY: f64 = 1e-14;
/// Default Gauss point count for the averaged vector field.
pub const AVF_DEFAULT_POINTS: usize = 3;
/// Default coordinate gap below which Itoh–Abe uses a centered derivative.
pub const ITOH_ABE_DEFAULT_TOL: f64 = 1e-9;

/// Gonzalez midpoint discrete gradient (strong form).
///
/// `gram` is the inner product of `H`; `grad` returns the Riesz
/// representative of the derivative.
pub fn gonzalez_dgrad<E, G, I>(energy: E, grad: G, gram: I, u: &[f64], v: &[f64]) -> Result<Vec<f64>>
where
    E: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
    I: Fn(&[f64], &[f64]) -> f64,
{
    gonzalez_by_difference(|a, b| Ok(energy(a)? - energy(b)?), grad, gram, u, v)
}

/// [`gonzalez_dgrad`] with `difference(a, b) = E[a] - E[b]` supplied directly.
pub fn gonzalez_by_difference<D, G, I>(difference: D, grad: G, gram: I, u: &[f64], v: &[f64]) -> Result<Vec<f64>>
where
    D: Fn(&[f64], &[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
    I: Fn(&[f64], &[f64]) -> f64,
{
    check_dim(u.len(), v.len())?;
    let diff: Vec<f64> = v.iter().zip(u).map(|(b, a)| b - a).collect();
    let dist = gram(&diff, &diff).max(0.0).sqrt();
    let scale = 1.0 + gram(u, u).max(0.0).sqrt() + gram(v, v).max(0.0).sqrt();
    if dist <= GONZALEZ_DEGENERACY * scale {
        let g = grad(u)?;
        check_finite("gradient", &g)?;
        return Ok(g);
    }
    let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
    let g = grad(&mid)?;
    check_finite("gradient", &g)?;
    check_dim(u.len(), g.len())?;
    let de = difference(v, u)?;
    check_finite("energy difference", &[de])?;
    let coef = (de - gram(&g, &diff)) / (dist * dist);
    Ok(g.iter().zip(&diff).map(|(gi, di)| gi + coef * di).collect())
}

/// Averaged vector field `∫_0^1 ∇E((1-s) u + s v) ds` by `points`-point
/// Gauss–Legendre quadrature.
///
/// The map is linear in `grad`, so weak (basis-paired) gradients give the
/// weak averaged vector field.
pub fn avf_dgrad<G>(grad: G, u: &[f64], v: &[f64], points: usize) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_dim(u.len(), v.len())?;
    if points < 1 {
        return Err(Error::InvalidArgument(
            "averaged vector field needs at least one quadrature point".into(),
        ));
    }
    let rule = gauss_legendre(points)?;
    let mut acc = vec![0.0; u.len()];
    let mut x = vec![0.0; u.len()];
    for (s, w) in rule.iter() {
        for ((xi, a), b) in x.iter_mut().zip(u).zip(v) {
            *xi = (1.0 - s) * a + s * b;
        }
        let g = grad(&x)?;
        check_dim(u.len(), g.len())?;
        for (ai, gi) in acc.iter_mut().zip(&g) {
            *ai += w * gi;
        }
    }
    check_finite("gradient", &acc)?;
    Ok(acc)
}

/// Itoh–Abe coordinate-increment discrete gradient.
///
/// Entry `j` is the difference quotient of `E` along coordinate `j` between
/// the mixed points `(v_1..v_{j-1}, u_j, u_{j+1}..u_N)` and
/// `(v_1..v_{j-1}, v_j, u_{j+1}..u_N)`. When `|u_j - v_j| <= coord_tol` a
/// centered difference with step `max(1e-7, 1e-7 |u_j|)` is used instead.
pub fn itoh_abe_dgrad<E>(energy: E, u: &[f64], v: &[f64], coord_tol: f64) -> Result<Vec<f64>>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    itoh_abe_by_difference(|a, b| Ok(energy(a)? - energy(b)?), u, v, coord_tol)
}

/// [`itoh_abe_dgrad`] with `difference(a, b) = E[a] - E[b]` supplied directly.
pub fn itoh_abe_by_difference<D>(difference: D, u: &[f64], v: &[f64], coord_tol: f64) -> Result<Vec<f64>>
where
    D: Fn(&[f64], &[f64]) -> Result<f64>,
{
    check_dim(u.len(), v.len())?;
    if !(coord_tol > 0.0) {
        return Err(Error::InvalidArgument("coord_tol must be positive".into()));
    }
    // invariant: hi = lo = (v_1..v_{j-1}, u_j..u_N) at the top of iteration j
    let mut hi = u.to_vec();
    let mut lo = u.to_vec();
    let mut out = Vec::with_capacity(u.len());
    for j in 0..u.len() {
        let gap = u[j] - v[j];
        let quotient = if gap.abs() <= coord_tol {
            let h = (1e-7 * u[j].abs()).max(1e-7);
            let centre = 0.5 * (u[j] + v[j]);
            hi[j] = centre + h;
            lo[j] = centre - h;
            difference(&hi, &lo)? / (2.0 * h)
        } else {
            lo[j] = v[j];
            difference(&hi, &lo)? / gap
        };
        check_finite("energy difference", &[quotient])?;
        out.push(quotient);
        hi[j] = v[j];
        lo[j] = v[j];
    }
    Ok(out)
}

/// Choice of discrete gradient for the stepper.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum DiscreteGradient {
    Gonzalez,
    Avf { points: usize },
    ItohAbe { coord_tol: f64 },
    /// Whatever [`GradientSystem::dgrad_weak`] provides (closed form for the
    /// scalar ODE, the weak-form construction for KdV).
    #[default]
    Native,
}

impl DiscreteGradient {
    pub fn avf() -> Self {
        DiscreteGradient::Avf {
            points: AVF_DEFAULT_POINTS,
        }
    }

    pub fn itoh_abe() -> Self {
        DiscreteGradient::ItohAbe {
            coord_tol: ITOH_ABE_DEFAULT_TOL,
        }
    }

    /// `<∇_d E(a, b), e_i>` for every basis vector.
    pub fn weak<P: GradientSystem + ?Sized>(&self, problem: &P, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        check_dim(problem.dim(), a.len())?;
        check_dim(problem.dim(), b.len())?;
        let out = match *self {
            DiscreteGradient::Gonzalez => gonzalez_weak(problem, a, b)?,
            DiscreteGradient::Avf { points } => avf_dgrad(|x| problem.grad_weak(x), a, b, points)?,
            // Coordinate difference quotients are exactly the basis pairings.
            DiscreteGradient::ItohAbe { coord_tol } => {
                itoh_abe_by_difference(|x, y| problem.energy_difference(x, y), a, b, coord_tol)?
            }
            DiscreteGradient::Native => problem.dgrad_weak(a, b)?,
        };
        check_finite("discrete gradient", &out)?;
        Ok(out)
    }
}

/// Gonzalez in weak form: `G g_mid + coef G (b - a)` where the correction
/// uses the Gram norm.
fn gonzalez_weak<P: GradientSystem + ?Sized>(problem: &P, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let diff: Vec<f64> = v.iter().zip(u).map(|(b, a)| b - a).collect();
    let g_diff = problem.gram_apply(&diff);
    let dist2 = dot(&g_diff, &diff).max(0.0);
    let scale = 1.0 + problem.gram(u, u).max(0.0).sqrt() + problem.gram(v, v).max(0.0).sqrt();
    if dist2.sqrt() <= GONZALEZ_DEGENERACY * scale {
        return problem.grad_weak(u);
    }
    let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
    let g = problem.grad_weak(&mid)?;
    let de = problem.energy_difference(v, u)?;
    check_finite("energy difference", &[de])?;
    let coef = (de - dot(&g, &diff)) / dist2;
    Ok(g.iter().zip(&g_diff).map(|(gi, di)| gi + coef * di).collect())
}

/// `|E[a] - E[b] - <∇_d E(a, b), a - b>|`.
pub fn dgrad_identity_residual<P: GradientSystem + ?Sized>(
    problem: &P,
    choice: DiscreteGradient,
    a: &[f64],
    b: &[f64],
) -> Result<f64> {
    let dg = choice.weak(problem, a, b)?;
    let pairing: f64 = dg.iter().zip(a.iter().zip(b)).map(|(g, (x, y))| g * (x - y)).sum();
    Ok((problem.energy(a)? - problem.energy(b)? - pairing).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(u: &[f64]) -> Result<f64> {
        Ok((1.0 - u[0] * u[0]).powi(2) / 4.0)
    }

    fn quartic_grad(u: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![u[0].powi(3) - u[0]])
    }

    fn euclid(a: &[f64], b: &[f64]) -> f64 {
        dot(a, b)
    }

    #[test]
    fn gonzalez_examples() {
        let g = gonzalez_dgrad(quartic, quartic_grad, euclid, &[1.0], &[1.0]).unwrap();
        assert_eq!(g, vec![0.0]);
        let g = gonzalez_dgrad(quartic, quartic_grad, euclid, &[2.0], &[0.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);

        let half = |u: &[f64]| Ok(0.5 * dot(u, u));
        let ident = |u: &[f64]| Ok(u.to_vec());
        let (u, v) = ([0.3, -1.2], [2.0, 0.7]);
        let g = gonzalez_dgrad(half, ident, euclid, &u, &v).unwrap();
        for i in 0..2 {
            assert!((g[i] - 0.5 * (u[i] + v[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn gonzalez_rejects_mismatch_and_nan() {
        assert!(matches!(
            gonzalez_dgrad(quartic, quartic_grad, euclid, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = |_: &[f64]| Ok(vec![f64::NAN]);
        assert!(gonzalez_dgrad(quartic, bad, euclid, &[1.0], &[2.0]).is_err());
    }

    #[test]
    fn avf_examples() {
        let g = avf_dgrad(quartic_grad, &[0.4], &[0.4], 3).unwrap();
        assert!((g[0] - (0.4f64.powi(3) - 0.4)).abs() < 1e-15);
        let g = avf_dgrad(quartic_grad, &[2.0], &[0.0], 2).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
        let g = avf_dgrad(|u: &[f64]| Ok(u.to_vec()), &[3.0], &[1.0], 1).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-15);
        assert!(avf_dgrad(quartic_grad, &[1.0], &[0.0], 0).is_err());
    }

    #[test]
    fn itoh_abe_examples() {
        let g = itoh_abe_dgrad(quartic, &[2.0], &[0.0], 1e-9).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14);
        let prod = |u: &[f64]| Ok(u[0] * u[1]);
        let g = itoh_abe_dgrad(prod, &[1.0, 1.0], &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(g, vec![1.0, 0.0]);
        let g = itoh_abe_dgrad(quartic, &[0.7], &[0.7], 1e-9).unwrap();
        assert!((g[0] - (0.343 - 0.7)).abs() < 1e-8);
        assert!(itoh_abe_dgrad(quartic, &[0.7], &[0.7], 0.0).is_err());
    }
}
