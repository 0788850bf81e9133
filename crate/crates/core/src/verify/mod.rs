//! Independent numerical oracles for the closed-form solution: grid
//! operators, Crank–Nicolson propagation, residuals of the defining
//! equations and coefficient-level pseudo-Hermiticity.

mod grid;
mod operator;
mod propagate;
mod residual;
pub mod suite;

pub use grid::Grid1D;
pub use operator::{
    build_hamiltonian, build_hamiltonian_with, build_hermitian_invariant, build_invariant, solve_tridiagonal,
    DiscretizedOperator, Potential,
};
pub use propagate::{crank_nicolson_propagate, PropagationResult, MAX_DT};
pub use residual::{
    conjugate_by_metric, invariant_eigen_residual, pseudo_hermiticity_check, tdse_residual, tdse_residual_branchwise,
    von_neumann_residual, von_neumann_residual_with, InvariantVariant, MetricParameters, DEFAULT_DELTA,
};
