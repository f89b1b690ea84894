//! The two testbeds: the double-well scalar ODE and periodic KdV with
//! conforming P^l finite elements.

mod kdv;
mod scalar;

pub use kdv::{SparseMatrix, build_kdv_problem, cnoidal_exact, interpolate_initial, CnoidalWave, KdvAssembly, KdvProblem};
pub use scalar::{scalar_dgrad_closed, scalar_ode_exact, ScalarOdeProblem};
