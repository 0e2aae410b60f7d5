//! Concave minimization over the sparsity-constrained unit sphere
//! `{x : ‖x‖ = 1, ‖x‖₀ ≤ κ}`, instantiated for sparse PCA and the
//! densest-k-subgraph relaxation.
//!
//! The objective is `f(x) = −xᵀΣx` for a symmetric operator `Σ`. Four
//! iterations are provided:
//!
//! * [`Method::Gpu`]: gradient projection with a fixed step,
//!   `x₊ = T_κ(x − s g)/‖·‖`.
//! * [`Method::Tpower`]: the truncated power method, `x₊ = T_κ(Σx)/‖·‖`.
//! * [`Method::Gpbb`]: the nonmonotone approximate Newton iteration with a
//!   Barzilai–Borwein Hessian surrogate `α`, anti-projecting when `α < 0`.
//! * [`Method::MonotoneNewton`]: the same model step with backtracking on
//!   `α` until `f(x₊) ≤ f(x) + α‖x₊ − x‖²`.
//!
//! Every iteration costs one product with `Σ` plus `O(n)` work for the
//! truncation.

pub mod datasets;
mod error;
pub mod linops;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod solvers;
pub mod sphere;

pub use error::{Error, Result};
pub use linops::SymmetricOperator;
pub use solvers::{
    BbVariant, Method, Objective, SolveReport, SolverConfig, Termination, TraceEntry,
};
pub use sphere::{SparseSphere, UnitSparseVector};
