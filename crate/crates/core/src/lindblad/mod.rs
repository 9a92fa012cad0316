//! Markovian master-equation engine.
//!
//! Integrates `d rho/dt = -i[H(t), rho] + sum_k r_k D[c_k] rho` with an
//! adaptive Dormand-Prince 5(4) scheme. Operators are compiled once into
//! coordinate lists so each right-hand-side evaluation costs
//! `O(nnz * dim)` instead of a dense product.

mod integrator;
mod model;
mod sparse;

pub use integrator::{
    evolve, evolve_driven, heisenberg_expectations, propagate, trajectory, Evolution, RunStats,
    SolverOptions, TimeSeries,
};
pub use model::{
    liouvillian_apply, CoefficientFn, CollapseTerm, DriveTerm, Hamiltonian, HamiltonianBuilder,
    LindbladModel,
};
