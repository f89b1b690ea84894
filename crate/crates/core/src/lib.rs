//! Energy-structure-preserving time integration for gradient systems
//! `u' = L(u) ∇E(u)`.
//!
//! The integrator splits the flow into the coupled pair `u' = L(u) p`,
//! `p = ∇E(u)` and discretizes it with discontinuous Galerkin time stepping
//! of degree `k`: `u` is tested against all of `P^k`, `p` against `P^{k-1}`,
//! and the left trace of `p` on each interval is pinned to a discrete
//! gradient. The resulting one-step method satisfies
//! `E[u^n] - E[u^{n-1}] = ∫ <L(u) p, p> dt` on every interval and reduces to
//! the classical discrete gradient method for `k = 0`.
//!
//! Modules:
//! - [`system`]: the [`GradientSystem`] trait and [`StateVector`].
//! - [`dgrad`]: Gonzalez, averaged vector field and Itoh–Abe discrete gradients.
//! - [`polybasis`]: Gauss–Legendre rules and nodal Lagrange bases on `[0, 1]`.
//! - [`specfun`]: `K(m)` and Jacobi `cn` for the cnoidal KdV solution.
//! - [`stepper`]: the per-interval Newton solve, trajectories and diagnostics.
//! - [`problems`]: the double-well scalar ODE and periodic P^l FEM KdV.
//! - [`cli`]: experiment drivers writing CSV traces and convergence tables.

pub mod cli;
pub mod dgrad;
mod error;
pub mod polybasis;
pub mod problems;
pub mod specfun;
pub mod stepper;
pub mod system;

pub use dgrad::DiscreteGradient;
pub use error::{Error, Result};
pub use polybasis::{gauss_legendre, lobatto_nodes, NodalBasis, QuadratureRule};
pub use stepper::{
    integrate, step_interval, IntervalSolution, JacobianMode, NewtonOptions, TimeMesh, Trajectory,
};
pub use system::{GradientSystem, OpStructure, StateVector};
