use super::{integrate_flow, FlowParams, FlowResult};
use crate::error::Result;
use crate::gibbs::{BetaVector, ExpectationVector};
use crate::linalg::{build_basis, coords_from_state, kron, DensityMatrix, HermitianOperator, OperatorSet};

/// `{T^A_a ⊗ 1} ∪ {1 ⊗ T^B_b}` on `C^{d_A} ⊗ C^{d_B}`.
pub fn marginal_operator_set(dim_a: usize, dim_b: usize) -> Result<OperatorSet> {
    let basis_a = build_basis(dim_a)?;
    let basis_b = build_basis(dim_b)?;
    let id_a = HermitianOperator::identity(dim_a);
    let id_b = HermitianOperator::identity(dim_b);
    let mut ops = Vec::with_capacity(basis_a.len() + basis_b.len());
    let mut labels = Vec::with_capacity(ops.capacity());
    for (a, t) in basis_a.elements().iter().enumerate() {
        ops.push(kron(t, &id_b));
        labels.push(format!("A{}", a + 1));
    }
    for (b, t) in basis_b.elements().iter().enumerate() {
        ops.push(kron(&id_a, t));
        labels.push(format!("B{}", b + 1));
    }
    OperatorSet::with_labels(ops, labels)
}

/// Expectation targets `(tr(rho_A T^A_a), tr(rho_B T^B_b))` for [`marginal_operator_set`].
pub fn marginal_target(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<ExpectationVector> {
    let mut e = coords_from_state(rho_a, &build_basis(rho_a.dim())?)?;
    e.extend(coords_from_state(rho_b, &build_basis(rho_b.dim())?)?);
    ExpectationVector::new(e)
}

/// Looks for a joint state with the given marginals.
///
/// On an interior verdict `result.state` is the maximum-entropy joint state,
/// whose partial traces reproduce `rho_a` and `rho_b`.
pub fn solve_marginal(rho_a: &DensityMatrix, rho_b: &DensityMatrix, params: &FlowParams) -> Result<FlowResult> {
    let set = marginal_operator_set(rho_a.dim(), rho_b.dim())?;
    let target = marginal_target(rho_a, rho_b)?;
    integrate_flow(&set, &target, &BetaVector::zeros(set.len()), params)
}
