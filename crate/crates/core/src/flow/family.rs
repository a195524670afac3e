use faer::{c64, Mat};

use super::{integrate_flow, Classification, FlowParams};
use crate::error::{AtlasError, Result};
use crate::gibbs::{evaluate, BetaVector, ExpectationVector};
use crate::linalg::{build_basis, DensityMatrix, HermitianOperator, OperatorSet};

/// Largest `N` for which the dense orthogonal complement is built.
pub const MAX_FAMILY_DIM: usize = 40;
/// Interval ends when the family never leaves the positive cone in that direction.
pub const INTERVAL_CAP: f64 = 1e12;

/// All states sharing the expectation values of an interior target.
///
/// Members are `center + sum_k c_k perp_basis[k]`; along each single
/// direction the state stays positive exactly for `λ ∈ intervals[k]`.
#[derive(Clone, Debug)]
pub struct StateFamily {
    /// The maximum-entropy member.
    pub center: DensityMatrix,
    pub beta: BetaVector,
    /// Traceless, orthogonal to every operator in the set, `tr(A B) = δ_AB`.
    pub perp_basis: Vec<HermitianOperator>,
    pub intervals: Vec<(f64, f64)>,
}

impl StateFamily {
    pub fn len(&self) -> usize {
        self.perp_basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perp_basis.is_empty()
    }

    /// `center + sum_k c_k perp_basis[k]`; Hermitian with unit trace but not necessarily positive.
    pub fn member(&self, coeffs: &[f64]) -> Result<HermitianOperator> {
        if coeffs.len() != self.len() {
            return Err(AtlasError::Domain(format!("expected {} coefficients, got {}", self.len(), coeffs.len())));
        }
        let shift = HermitianOperator::linear_combination(coeffs, &self.perp_basis);
        Ok(self.center.as_operator().add_scaled(1.0, &shift))
    }

    /// `center + λ perp_basis[k]`.
    pub fn member_along(&self, k: usize, lambda: f64) -> HermitianOperator {
        self.center.as_operator().add_scaled(lambda, &self.perp_basis[k])
    }
}

/// Orthonormal basis (under `tr(A B)`) of the traceless operators orthogonal to `set`.
fn orthogonal_complement(set: &OperatorSet) -> Result<Vec<HermitianOperator>> {
    let dim = set.dim();
    let mut accepted: Vec<HermitianOperator> = Vec::new();
    let reduce = |mut op: HermitianOperator, against: &[HermitianOperator]| {
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for q in against {
                op = op.add_scaled(-op.inner(q), q);
            }
        }
        op
    };
    for op in set.ops() {
        let r = reduce(op.clone(), &accepted);
        let norm = r.frobenius_norm();
        accepted.push(r.scaled(1.0 / norm));
    }
    let spanned = accepted.len();
    let target = dim * dim - 1 - spanned;
    for t in build_basis(dim)?.elements() {
        if accepted.len() - spanned == target {
            break;
        }
        let r = reduce(t.scaled(1.0 / (dim as f64).sqrt()), &accepted);
        let norm = r.frobenius_norm();
        if norm > 1e-8 {
            accepted.push(r.scaled(1.0 / norm));
        }
    }
    if accepted.len() - spanned != target {
        return Err(AtlasError::Numerical(format!(
            "orthogonal complement has {} elements, expected {target}",
            accepted.len() - spanned
        )));
    }
    Ok(accepted.split_off(spanned))
}

/// Positivity interval of `rho + λ O` for `rho = V diag(p) V^†`.
fn positivity_interval(populations: &[f64], vectors: faer::MatRef<'_, c64>, op: &HermitianOperator) -> Result<(f64, f64)> {
    let n = populations.len();
    let rotated = vectors.adjoint() * (op.as_mat() * vectors);
    let inv_sqrt: Vec<f64> = populations.iter().map(|p| 1.0 / p.max(f64::MIN_POSITIVE).sqrt()).collect();
    let k = Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(rotated[(i, i)].re * inv_sqrt[i] * inv_sqrt[i], 0.0)
        } else {
            let z = (rotated[(i, j)] + rotated[(j, i)].conj()) * 0.5;
            z * (inv_sqrt[i] * inv_sqrt[j])
        }
    });
    let nu = HermitianOperator::from_mat_unchecked(k).eigenvalues()?;
    // rho + λO = rho^{1/2}(1 + λK)rho^{1/2} >= 0  iff  1 + λν >= 0 for all ν
    let most_negative = -nu[0];
    let most_positive = nu[n - 1];
    let upper = if most_negative > 0.0 { (1.0 / most_negative).min(INTERVAL_CAP) } else { INTERVAL_CAP };
    let lower = if most_positive > 0.0 { (-1.0 / most_positive).max(-INTERVAL_CAP) } else { -INTERVAL_CAP };
    Ok((lower, upper))
}

/// The family through the Gibbs state at `beta`.
pub fn family_at(set: &OperatorSet, beta: &BetaVector) -> Result<StateFamily> {
    let dim = set.dim();
    if dim > MAX_FAMILY_DIM {
        return Err(AtlasError::Unsupported(format!(
            "state families are built densely and limited to N <= {MAX_FAMILY_DIM}, got N = {dim}"
        )));
    }
    let point = evaluate(beta, set)?;
    let center = point.spectrum.state();
    let populations = point.spectrum.populations();
    let vectors = point.spectrum.eigen().vectors.as_ref();
    let perp_basis = orthogonal_complement(set)?;
    let intervals = perp_basis
        .iter()
        .map(|op| positivity_interval(&populations, vectors, op))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateFamily {
        center,
        beta: beta.clone(),
        perp_basis,
        intervals,
    })
}

/// Solves the inverse problem for `target` and describes every state with
/// the same expectations. Fails with `Precondition` unless the target is interior.
pub fn state_family(set: &OperatorSet, target: &ExpectationVector, params: &FlowParams) -> Result<StateFamily> {
    if set.dim() > MAX_FAMILY_DIM {
        return family_at(set, &BetaVector::zeros(set.len()));
    }
    let result = integrate_flow(set, target, &BetaVector::zeros(set.len()), params)?;
    if result.classification != Classification::Interior {
        return Err(AtlasError::Precondition(format!(
            "state family needs an interior target, flow reported {}",
            result.classification.as_str()
        )));
    }
    family_at(set, &result.beta_final)
}
