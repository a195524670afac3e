//! Dense complex Hermitian linear algebra shared by every other module.
//!
//! Matrices are stored as [`faer::Mat<c64>`]. The newtypes here carry the
//! invariants the rest of the crate relies on: [`HermitianOperator`] is
//! Hermitian, [`DensityMatrix`] is additionally unit-trace and positive
//! semidefinite, and [`OperatorSet`] is a linearly independent family of
//! traceless operators of a common dimension.

mod basis;
mod random;

pub use basis::{
    build_basis, coords_from_state, reconstruction_residual, state_from_coords, structure_tensors, BasisSet, StructureTensors,
};
pub use random::{random_density, random_hermitian, random_unit_vector};

use faer::{c64, Mat, MatRef, Side};

use crate::error::{AtlasError, Result};

/// Relative Frobenius tolerance for Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance (scaled by the dimension) for tracelessness and unit trace.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Smallest admissible ratio between the extreme Gram eigenvalues.
pub const GRAM_RATIO_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate level.
///
/// `norm2` is the spectral norm of the matrix the eigenvalues came from.
pub fn degeneracy_tol(norm2: f64) -> f64 {
    1e-9 * norm2.max(1.0)
}

pub(crate) fn frobenius(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

pub(crate) fn trace(m: MatRef<'_, c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let n = a.nrows();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn hermitian_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

fn symmetrized(m: MatRef<'_, c64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// A Hermitian operator on `C^N`.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<c64>,
}

impl HermitianOperator {
    /// Validates Hermiticity to [`HERMITIAN_TOL`] (relative Frobenius) and
    /// stores the exactly symmetrized matrix.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() == 0 || mat.nrows() != mat.ncols() {
            return Err(AtlasError::Validation(format!(
                "operator must be square with dim >= 1, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !mat.as_ref().is_all_finite() {
            return Err(AtlasError::Validation("operator has non-finite entries".into()));
        }
        let defect = hermitian_defect(mat.as_ref());
        let scale = frobenius(mat.as_ref());
        if defect > HERMITIAN_TOL * scale {
            return Err(AtlasError::Validation(format!(
                "operator is not Hermitian: |H - H^dag|_F = {defect:.3e} vs |H|_F = {scale:.3e}"
            )));
        }
        Ok(Self {
            mat: symmetrized(mat.as_ref()),
        })
    }

    /// Builds an operator entry by entry; the closure is evaluated on every `(row, col)`.
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f))
    }

    /// Real symmetric matrix given as rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(AtlasError::Validation("rows must form a square matrix".into()));
        }
        Self::from_fn(n, |i, j| c64::new(rows[i][j], 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            mat: Mat::from_fn(n, n, |i, j| if i == j { c64::new(diag[i], 0.0) } else { c64::new(0.0, 0.0) }),
        }
    }

    /// Assumes the caller already guarantees Hermiticity.
    pub(crate) fn from_mat_unchecked(mat: Mat<c64>) -> Self {
        debug_assert!(hermitian_defect(mat.as_ref()) <= 1e-9 * frobenius(mat.as_ref()).max(1.0));
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        trace(self.mat.as_ref()).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(self.mat.as_ref())
    }

    /// Trace inner product `tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        trace_product(self.as_mat(), other.as_mat()).re
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * factor),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &HermitianOperator) -> Self {
        Self {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] + other.mat[(i, j)] * factor),
        }
    }

    /// `sum_i coeffs[i] * ops[i]`; `ops` must be nonempty and share a dimension.
    pub fn linear_combination(coeffs: &[f64], ops: &[HermitianOperator]) -> Self {
        assert_eq!(coeffs.len(), ops.len());
        let n = ops[0].dim();
        let mut mat = Mat::<c64>::zeros(n, n);
        for (c, op) in coeffs.iter().zip(ops) {
            if *c == 0.0 {
                continue;
            }
            for j in 0..n {
                for i in 0..n {
                    mat[(i, j)] += op.mat[(i, j)] * *c;
                }
            }
        }
        Self { mat }
    }

    /// `tr(rho O)` for a state of matching dimension.
    pub fn expectation(&self, rho: &DensityMatrix) -> f64 {
        trace_product(rho.as_mat(), self.as_mat()).re
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_hermitian(self)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let values = self.eigenvalues()?;
        Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    /// Ascending eigenvalues only.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let values = self
            .mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| eig_failure(self))?;
        Ok(values)
    }
}

/// `‖[A, B]‖_F`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    let ab = a.as_mat() * b.as_mat();
    let ba = b.as_mat() * a.as_mat();
    frobenius((&ab - &ba).as_ref())
}

/// Kronecker product `A ⊗ B`, of dimension `dim(A) * dim(B)`.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    let (na, nb) = (a.dim(), b.dim());
    let mat = Mat::from_fn(na * nb, na * nb, |r, c| a.mat[(r / nb, c / nb)] * b.mat[(r % nb, c % nb)]);
    HermitianOperator { mat }
}

/// A unit-trace positive semidefinite Hermitian operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: Mat<c64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and `λ_min ≥ PSD_TOL`.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        let op = HermitianOperator::new(mat)?;
        let n = op.dim() as f64;
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL * n {
            return Err(AtlasError::Validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = op.eigenvalues()?[0];
        if min < PSD_TOL {
            return Err(AtlasError::Validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { mat: op.mat })
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        Self::new(op.mat)
    }

    pub(crate) fn from_mat_unchecked(mat: Mat<c64>) -> Self {
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        Self {
            mat: Mat::from_fn(dim, dim, |i, j| if i == j { c64::new(w, 0.0) } else { c64::new(0.0, 0.0) }),
        }
    }

    /// Diagonal state with the given probabilities.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(p).mat)
    }

    /// `v v^†` for a vector normalized internally.
    pub fn pure(v: &[c64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(AtlasError::Domain("cannot build a pure state from a zero vector".into()));
        }
        let n = v.len();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| v[i] * v[j].conj() / (norm * norm)),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator { mat: self.mat.clone() }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.as_operator().eigenvalues()
    }

    /// `tr_B` of a state on `C^{dim_a} ⊗ C^{dim_b}`.
    pub fn partial_trace_b(&self, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
        self.check_bipartite(dim_a, dim_b)?;
        let mat = Mat::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| self.mat[(i * dim_b + k, j * dim_b + k)]).sum()
        });
        Ok(Self { mat })
    }

    /// `tr_A` of a state on `C^{dim_a} ⊗ C^{dim_b}`.
    pub fn partial_trace_a(&self, dim_a: usize, dim_b: usize) -> Result<DensityMatrix> {
        self.check_bipartite(dim_a, dim_b)?;
        let mat = Mat::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| self.mat[(k * dim_b + i, k * dim_b + j)]).sum()
        });
        Ok(Self { mat })
    }

    fn check_bipartite(&self, dim_a: usize, dim_b: usize) -> Result<()> {
        if dim_a * dim_b != self.dim() {
            return Err(AtlasError::Domain(format!(
                "state of dim {} is not on a {}x{} bipartite space",
                self.dim(),
                dim_a,
                dim_b
            )));
        }
        Ok(())
    }
}

/// Eigenpairs of a Hermitian operator.
///
/// Values ascend; column `k` of `vectors` is the unit eigenvector for
/// `values[k]`, with its largest-magnitude component (first one on ties)
/// rotated to be real and positive.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Number of eigenvalues within [`degeneracy_tol`] of the smallest one.
    pub fn ground_multiplicity(&self) -> usize {
        let tol = degeneracy_tol(self.spectral_norm());
        let min = self.values[0];
        self.values.iter().take_while(|v| **v - min < tol).count()
    }

    pub fn vector(&self, k: usize) -> Vec<c64> {
        (0..self.dim()).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn eig_failure(h: &HermitianOperator) -> AtlasError {
    AtlasError::Numerical(format!(
        "Hermitian eigensolver reached its iteration limit without converging (dim {}, |H|_F = {:.3e})",
        h.dim(),
        h.frobenius_norm()
    ))
}

/// Full eigendecomposition with the crate's deterministic phase convention.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<EigenDecomposition> {
    let evd = h.mat.self_adjoint_eigen(Side::Lower).map_err(|_| eig_failure(h))?;
    let n = h.dim();
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vectors = evd.U().to_owned();
    for k in 0..n {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..n {
            let mag = vectors[(i, k)].norm();
            // strict comparison keeps the first of equally large components
            if mag > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = mag;
            }
        }
        let pivot = vectors[(best, k)];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / pivot.norm();
            for i in 0..n {
                vectors[(i, k)] *= phase;
            }
            vectors[(best, k)] = c64::new(vectors[(best, k)].re, 0.0);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// A validated family of linearly independent traceless Hermitian operators.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    ops: Vec<HermitianOperator>,
    gram: Mat<f64>,
    labels: Vec<String>,
}

impl OperatorSet {
    pub fn new(ops: Vec<HermitianOperator>) -> Result<Self> {
        let labels = (1..=ops.len()).map(|i| format!("O{i}")).collect();
        Self::with_labels(ops, labels)
    }

    pub fn with_labels(ops: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        if ops.is_empty() {
            return Err(AtlasError::Validation("operator set is empty".into()));
        }
        if labels.len() != ops.len() {
            return Err(AtlasError::Validation(format!(
                "{} labels for {} operators",
                labels.len(),
                ops.len()
            )));
        }
        let dim = ops[0].dim();
        for (i, op) in ops.iter().enumerate() {
            if op.dim() != dim {
                return Err(AtlasError::Validation(format!(
                    "operator {i} has dim {} but operator 0 has dim {dim}",
                    op.dim()
                )));
            }
            let tr = op.trace();
            if tr.abs() > TRACE_TOL * dim as f64 {
                return Err(AtlasError::Validation(format!(
                    "operator {i} is not traceless (tr = {tr:.3e}); use the affine split to accept it"
                )));
            }
        }
        let gram = gram_matrix(&ops);
        let spectrum = gram_spectrum(&gram)?;
        let (lo, hi) = (spectrum[0], spectrum[spectrum.len() - 1]);
        if !(hi > 0.0) || lo < GRAM_RATIO_TOL * hi {
            return Err(AtlasError::Validation(format!(
                "operators are linearly dependent: Gram eigenvalues span [{lo:.3e}, {hi:.3e}]"
            )));
        }
        Ok(Self { ops, gram, labels })
    }

    /// Splits `O_i = O_i' + c_i 1` and validates the traceless parts.
    ///
    /// Returns the traceless set together with the offsets `c_i = tr(O_i)/N`;
    /// expectation vectors of the original operators are those of the
    /// traceless set shifted by `c`.
    pub fn with_affine_split(ops: Vec<HermitianOperator>, labels: Vec<String>) -> Result<(Self, Vec<f64>)> {
        let mut offsets = Vec::with_capacity(ops.len());
        let mut shifted = Vec::with_capacity(ops.len());
        for op in ops {
            let c = op.trace() / op.dim() as f64;
            let id = HermitianOperator::identity(op.dim());
            shifted.push(op.add_scaled(-c, &id));
            offsets.push(c);
        }
        Ok((Self::with_labels(shifted, labels)?, offsets))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[HermitianOperator] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &HermitianOperator {
        &self.ops[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `tr(O_i O_j)`.
    pub fn gram(&self) -> MatRef<'_, f64> {
        self.gram.as_ref()
    }

    pub fn gram_spectrum(&self) -> Result<Vec<f64>> {
        gram_spectrum(&self.gram)
    }

    /// `sum_i e_i O_i`.
    pub fn direction_operator(&self, e: &[f64]) -> HermitianOperator {
        HermitianOperator::linear_combination(e, &self.ops)
    }

    /// Expectation vector `(tr(rho O_i))_i`.
    pub fn expectations(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.ops.iter().map(|o| o.expectation(rho)).collect()
    }

    /// Every operator multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_labels(self.ops.iter().map(|o| o.scaled(factor)).collect(), self.labels.clone())
    }
}

fn gram_matrix(ops: &[HermitianOperator]) -> Mat<f64> {
    let n = ops.len();
    let mut g = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = ops[i].inner(&ops[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

fn gram_spectrum(gram: &Mat<f64>) -> Result<Vec<f64>> {
    gram.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| AtlasError::Numerical("Gram eigenvalues did not converge".into()))
}

/// Real symmetric eigenvalues of a small dense matrix, ascending.
pub(crate) fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| AtlasError::Numerical("symmetric eigenvalues did not converge".into()))
}
