use faer::{c64, Mat};

use super::{frobenius, trace_product, DensityMatrix, HermitianOperator, OperatorSet};
use crate::error::{AtlasError, Result};

/// Orthogonal traceless basis of the Hermitian operators on `C^N`,
/// normalized to `tr(T_a T_b) = N δ_ab`.
///
/// Elements are the generalized Gell-Mann matrices rescaled by `sqrt(N/2)`,
/// in a fixed order:
///
/// 1. symmetric off-diagonal `E_jk + E_kj` for `j < k`, pairs in lexicographic order;
/// 2. antisymmetric off-diagonal `-i E_jk + i E_kj` for `j < k`, same order;
/// 3. diagonal `sqrt(2 / (l (l + 1))) (E_00 + ... + E_{l-1,l-1} - l E_ll)` for `l = 1..N-1`.
///
/// For `N = 2` this is `(σ_x, σ_y, σ_z)`.
#[derive(Clone, Debug)]
pub struct BasisSet {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl BasisSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &HermitianOperator {
        &self.elements[a]
    }

    /// Coefficients `tr(H T_a) / N` of a Hermitian operator.
    pub fn expand(&self, h: &HermitianOperator) -> Vec<f64> {
        let n = self.dim as f64;
        self.elements.iter().map(|t| t.inner(h) / n).collect()
    }

    /// The whole basis as an operator set (the full-basis case `S = T`).
    pub fn to_operator_set(&self) -> OperatorSet {
        let labels = (1..=self.len()).map(|a| format!("T{a}")).collect();
        OperatorSet::with_labels(self.elements.clone(), labels).expect("generalized Gell-Mann basis is a valid operator set")
    }
}

/// Generalized Gell-Mann basis of dimension `N >= 2`; see [`BasisSet`] for the ordering.
pub fn build_basis(dim: usize) -> Result<BasisSet> {
    if dim < 2 {
        return Err(AtlasError::Domain(format!("basis needs N >= 2, got {dim}")));
    }
    let zero = c64::new(0.0, 0.0);
    let scale = (dim as f64 / 2.0).sqrt();
    let mut elements = Vec::with_capacity(dim * dim - 1);
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| ((j + 1)..dim).map(move |k| (j, k))).collect();
    for &(j, k) in &pairs {
        let mut m = Mat::<c64>::zeros(dim, dim);
        m[(j, k)] = c64::new(scale, 0.0);
        m[(k, j)] = c64::new(scale, 0.0);
        elements.push(HermitianOperator::from_mat_unchecked(m));
    }
    for &(j, k) in &pairs {
        let mut m = Mat::<c64>::zeros(dim, dim);
        m[(j, k)] = c64::new(0.0, -scale);
        m[(k, j)] = c64::new(0.0, scale);
        elements.push(HermitianOperator::from_mat_unchecked(m));
    }
    for l in 1..dim {
        let norm = scale * (2.0 / (l * (l + 1)) as f64).sqrt();
        let m = Mat::from_fn(dim, dim, |r, c| match (r == c, r.cmp(&l)) {
            (true, std::cmp::Ordering::Less) => c64::new(norm, 0.0),
            (true, std::cmp::Ordering::Equal) => c64::new(-(l as f64) * norm, 0.0),
            _ => zero,
        });
        elements.push(HermitianOperator::from_mat_unchecked(m));
    }
    Ok(BasisSet { dim, elements })
}

/// Structure constants of a [`BasisSet`].
///
/// With `T_i T_j = Z^k_ij T_k + g̃_ij 1` and `g̃_ij = tr(T_i T_j)/N`:
///
/// * `zee[k][i][j] = Z^k_ij = tr(T_i T_j T_k) / N`,
/// * `s_abc = tr({T_a, T_b} T_c) / (2 N^2)`, totally symmetric, so that
///   `(1/2){T_a, T_b} = δ_ab 1 + N s_abc T_c`.
#[derive(Clone, Debug)]
pub struct StructureTensors {
    len: usize,
    s: Vec<f64>,
    zee: Vec<c64>,
    gee: Mat<f64>,
}

impl StructureTensors {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.len + b) * self.len + c
    }

    pub fn s(&self, a: usize, b: usize, c: usize) -> f64 {
        self.s[self.index(a, b, c)]
    }

    /// `Z^k_ij`.
    pub fn z(&self, k: usize, i: usize, j: usize) -> c64 {
        self.zee[self.index(k, i, j)]
    }

    /// `g̃_ij = tr(T_i T_j) / N`.
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.gee[(i, j)]
    }
}

pub fn structure_tensors(basis: &BasisSet) -> StructureTensors {
    let len = basis.len();
    let n = basis.dim() as f64;
    let els = basis.elements();
    let mut zee = vec![c64::new(0.0, 0.0); len * len * len];
    let mut s = vec![0.0; len * len * len];
    let gee = Mat::from_fn(len, len, |i, j| els[i].inner(&els[j]) / n);
    for i in 0..len {
        for j in 0..len {
            let prod = els[i].as_mat() * els[j].as_mat();
            for k in 0..len {
                let t = trace_product(prod.as_ref(), els[k].as_mat());
                zee[(k * len + i) * len + j] = t / n;
                // tr({T_i,T_j} T_k) = 2 Re tr(T_i T_j T_k)
                s[(i * len + j) * len + k] = t.re / (n * n);
            }
        }
    }
    StructureTensors { len, s, zee, gee }
}

/// Largest `‖T_i T_j − Z^k_ij T_k − g̃_ij 1‖_F` over all index pairs.
pub fn reconstruction_residual(basis: &BasisSet, tensors: &StructureTensors) -> f64 {
    let len = basis.len();
    let dim = basis.dim();
    let els = basis.elements();
    let mut worst = 0.0_f64;
    for i in 0..len {
        for j in 0..len {
            let mut r = els[i].as_mat() * els[j].as_mat();
            for k in 0..len {
                let z = tensors.z(k, i, j);
                for col in 0..dim {
                    for row in 0..dim {
                        r[(row, col)] -= els[k].entry(row, col) * z;
                    }
                }
            }
            for d in 0..dim {
                r[(d, d)] -= c64::new(tensors.g(i, j), 0.0);
            }
            worst = worst.max(frobenius(r.as_ref()));
        }
    }
    worst
}

/// `(1/N)(1 + sum_a x_a T_a)`: Hermitian with unit trace, not necessarily positive.
pub fn state_from_coords(x: &[f64], basis: &BasisSet) -> Result<HermitianOperator> {
    if x.len() != basis.len() {
        return Err(AtlasError::Domain(format!(
            "expected {} coordinates for N = {}, got {}",
            basis.len(),
            basis.dim(),
            x.len()
        )));
    }
    let n = basis.dim();
    let sum = HermitianOperator::linear_combination(x, basis.elements());
    let id = HermitianOperator::identity(n);
    Ok(id.add_scaled(1.0, &sum).scaled(1.0 / n as f64))
}

/// `x_a = tr(rho T_a)`.
pub fn coords_from_state(rho: &DensityMatrix, basis: &BasisSet) -> Result<Vec<f64>> {
    if rho.dim() != basis.dim() {
        return Err(AtlasError::Domain(format!(
            "state has dim {} but basis has dim {}",
            rho.dim(),
            basis.dim()
        )));
    }
    Ok(basis.elements().iter().map(|t| t.expectation(rho)).collect())
}
