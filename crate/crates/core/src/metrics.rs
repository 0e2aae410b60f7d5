//! Solution quality measures: explained variance, eigenvalue error, subgraph
//! density, and deflation for further components.

use serde::{Deserialize, Serialize};

use crate::linops::{dot, Eigenpair};
use crate::sphere::UnitSparseVector;
use crate::{Error, Result, SymmetricOperator};

/// Residual tolerance for the dense principal component.
pub const DENSE_PC_TOL: f64 = 1e-12;
pub const DENSE_PC_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// `xᵀΣx` for the sparse component.
    pub sparse_value: f64,
    /// `λ₁ = yᵀΣy` for the dense first principal component.
    pub dense_value: f64,
    pub ratio: f64,
}

/// Dominant eigenpair used as the explained-variance denominator.
pub fn dense_component(op: &SymmetricOperator) -> Result<Eigenpair> {
    op.power_method(DENSE_PC_TOL, DENSE_PC_MAX_ITER)
}

/// Proportion of explained variance `xᵀΣx / λ₁`.
pub fn explained_variance(op: &SymmetricOperator, x: &UnitSparseVector) -> Result<VarianceReport> {
    let lambda1 = dense_component(op)?.value;
    explained_variance_with(op, x, lambda1)
}

/// As [`explained_variance`] with a precomputed `λ₁`.
pub fn explained_variance_with(
    op: &SymmetricOperator,
    x: &UnitSparseVector,
    lambda1: f64,
) -> Result<VarianceReport> {
    if lambda1 == 0.0 {
        return Err(Error::ZeroDenominator("explained variance"));
    }
    let sparse_value = dot(x.as_slice(), &op.matvec(x.as_slice())?);
    Ok(VarianceReport {
        sparse_value,
        dense_value: lambda1,
        ratio: sparse_value / lambda1,
    })
}

/// `|λ_exact − λ_approx| / |λ_exact|`.
pub fn relative_error(exact: f64, approx: f64) -> Result<f64> {
    if exact == 0.0 {
        return Err(Error::ZeroDenominator("relative error"));
    }
    Ok((exact - approx).abs() / exact.abs())
}

/// `xᵀAx`, which equals `πᵀAπ/k` for `π = √k·x`.
///
/// `x` should have at most `k` nonzeros.
pub fn dks_density(adjacency: &SymmetricOperator, x: &UnitSparseVector, k: usize) -> f64 {
    debug_assert!(x.nnz() <= k, "{} nonzeros exceed k = {k}", x.nnz());
    let ax = adjacency
        .matvec(x.as_slice())
        .expect("adjacency and vector dimensions agree");
    dot(x.as_slice(), &ax)
}

/// Projection deflation `(I − xxᵀ)Σ(I − xxᵀ)`, which keeps `Σ` positive
/// semidefinite and maps `x` to zero.
pub fn deflate(op: &SymmetricOperator, x: &UnitSparseVector) -> SymmetricOperator {
    op.deflated(x.as_slice())
        .expect("deflation direction has the operator dimension")
}
