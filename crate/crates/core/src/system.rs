//! The abstract gradient system `u' = L(u) ∇E(u)` on a finite-dimensional
//! real Hilbert space.
//!
//! Everything is expressed in weak form: instead of returning the strong
//! vectors `∇E(u)` or `L(u) p`, a problem returns their pairings against the
//! coordinate basis `e_i`. With an identity Gram matrix (plain ODEs) the two
//! coincide; for Galerkin discretizations the weak form avoids mass-matrix
//! solves inside the stepper.

use std::ops::Deref;

use crate::error::{check_finite, Error, Result};

/// Sign structure of the operator `L(u)`, which decides whether the energy is
/// conserved or dissipated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpStructure {
    SkewSymmetric,
    NegativeSemidefinite,
    General,
}

/// Coordinates of an element of `H`. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite("state vector", &coords)?;
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

/// A gradient system in weak (basis-paired) form.
///
/// Implementations may reject inadmissible states with
/// [`Error::Inadmissible`].
pub trait GradientSystem {
    fn dim(&self) -> usize;

    /// `G a` where `G_ij = <e_j, e_i>`.
    fn gram_apply(&self, a: &[f64]) -> Vec<f64>;

    /// Solves `G x = rhs`.
    fn gram_solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;

    fn energy(&self, u: &[f64]) -> Result<f64>;

    /// `<∇E(u), e_i>` for every basis vector.
    fn grad_weak(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// `<L(u_ctx) p, e_i>` for every basis vector.
    fn op_weak(&self, u_ctx: &[f64], p: &[f64]) -> Result<Vec<f64>>;

    /// The problem's own discrete gradient, `<∇_d E(a, b), e_i>`.
    fn dgrad_weak(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>>;

    fn op_structure(&self) -> OpStructure;

    /// `E[a] - E[b]`. Override with a cancellation-free form where one
    /// exists; the energy-difference discrete gradients divide this by
    /// `|a - b|`.
    fn energy_difference(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(self.energy(a)? - self.energy(b)?)
    }

    /// `<a, b>` in `H`.
    fn gram(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(&self.gram_apply(a), b)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_vector_rejects_nan() {
        assert!(StateVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(StateVector::new(vec![1.0, f64::INFINITY]).is_err());
        let s = StateVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1], 2.0);
    }
}
