//! The generalized Gibbs map `beta -> E(beta)`.
//!
//! Every quantity at a point `beta` is derived from a single
//! eigendecomposition of `M = sum_i beta_i O_i`. Exponentials are always
//! taken of `-(λ_k - λ_min)`, so nothing overflows however far `beta` is
//! pushed toward the boundary of the expectation body; `ln Z` adds the shift
//! back analytically.

use faer::{c64, Mat, MatRef};

use crate::error::{AtlasError, Result};
use crate::linalg::{degeneracy_tol, symmetric_eigenvalues, DensityMatrix, EigenDecomposition, OperatorSet};

/// Queries with `‖beta‖` above this are refused as saturated.
pub const BETA_SATURATION: f64 = 1e6;

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AtlasError::Domain(format!("{what} has non-finite entries")))
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Inverse-temperature coordinates `beta_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaVector(Vec<f64>);

impl BetaVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords, "beta vector")?;
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        euclid(&self.0)
    }
}

/// A point `(E_1, ..., E_n)` in expectation space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectationVector(Vec<f64>);

impl ExpectationVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords, "expectation vector")?;
        Ok(Self(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &ExpectationVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// `J_ij = ∂E_j / ∂beta_i`, symmetric negative definite.
#[derive(Clone, Debug)]
pub struct JacobianMatrix {
    entries: Mat<f64>,
}

impl JacobianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.entries.as_ref()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0_f64, |m, (i, j)| m.max(self.entries[(i, j)].abs()))
    }

    /// Ascending eigenvalues; all negative for a valid operator set.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(self.entries.as_ref())
    }
}

fn check_lengths(beta: &BetaVector, set: &OperatorSet) -> Result<()> {
    if beta.len() != set.len() {
        return Err(AtlasError::Domain(format!(
            "beta has {} coordinates but the operator set has {} operators",
            beta.len(),
            set.len()
        )));
    }
    if beta.norm() > BETA_SATURATION {
        return Err(AtlasError::Domain(format!(
            "|beta| = {:.3e} exceeds the saturation cap {:.0e}; the Gibbs state is numerically a ground state",
            beta.norm(),
            BETA_SATURATION
        )));
    }
    Ok(())
}

/// Divided difference of `exp(-λ)`:
/// `(e^{-a} - e^{-b}) / (b - a)`, or `e^{-(a + b)/2}` when `|a - b| < tol`.
pub fn h_kernel(a: f64, b: f64, tol: f64) -> f64 {
    let gap = b - a;
    if gap.abs() < tol {
        return (-0.5 * (a + b)).exp();
    }
    let (lo, d) = if gap > 0.0 { (a, gap) } else { (b, -gap) };
    // e^{-lo} (1 - e^{-d}) / d, accurate for small d
    (-lo).exp() * (-(-d).exp_m1()) / d
}

/// Spectral data of `M = beta · O` shared by every Gibbs quantity.
#[derive(Clone, Debug)]
pub struct ThermalSpectrum {
    eig: EigenDecomposition,
    /// `e^{-(λ_k - λ_min)}`
    weights: Vec<f64>,
    shifted_z: f64,
}

impl ThermalSpectrum {
    pub fn new(beta: &BetaVector, set: &OperatorSet) -> Result<Self> {
        check_lengths(beta, set)?;
        let m = set.direction_operator(beta.as_slice());
        let eig = m.eig()?;
        let lmin = eig.values[0];
        let weights: Vec<f64> = eig.values.iter().map(|l| (-(l - lmin)).exp()).collect();
        let shifted_z = weights.iter().sum();
        Ok(Self { eig, weights, shifted_z })
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    /// `ln tr e^{-M} = -λ_min + ln sum_k e^{-(λ_k - λ_min)}`.
    pub fn log_partition(&self) -> f64 {
        -self.eig.values[0] + self.shifted_z.ln()
    }

    /// Eigenvalues of the Gibbs state, in the order of `eigen().values`.
    pub fn populations(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.shifted_z).collect()
    }

    pub fn state(&self) -> DensityMatrix {
        let p = self.populations();
        let v = &self.eig.vectors;
        let n = p.len();
        let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * p[k]);
        let mut rho = &scaled * v.adjoint();
        for i in 0..n {
            for j in 0..i {
                let z = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
                rho[(i, j)] = z;
                rho[(j, i)] = z.conj();
            }
            rho[(i, i)] = c64::new(rho[(i, i)].re, 0.0);
        }
        DensityMatrix::from_mat_unchecked(rho)
    }

    /// Operators in the eigenbasis of `M`: `V^† O_i V`.
    pub fn rotate(&self, set: &OperatorSet) -> Vec<Mat<c64>> {
        let v = &self.eig.vectors;
        set.ops().iter().map(|o| v.adjoint() * (o.as_mat() * v)).collect()
    }

    /// `E_i = sum_k p_k <k|O_i|k>`.
    pub fn expectations(&self, set: &OperatorSet) -> ExpectationVector {
        let p = self.populations();
        let v = &self.eig.vectors;
        let n = p.len();
        let e = set
            .ops()
            .iter()
            .map(|o| {
                let ov = o.as_mat() * v;
                (0..n)
                    .map(|k| {
                        let diag: f64 = (0..n).map(|j| (v[(j, k)].conj() * ov[(j, k)]).re).sum();
                        p[k] * diag
                    })
                    .sum()
            })
            .collect();
        ExpectationVector(e)
    }

    fn expectations_from_rotated(&self, rotated: &[Mat<c64>]) -> Vec<f64> {
        let p = self.populations();
        rotated.iter().map(|a| p.iter().enumerate().map(|(k, pk)| pk * a[(k, k)].re).sum()).collect()
    }

    fn jacobian_from_rotated(&self, rotated: &[Mat<c64>], e: &[f64]) -> JacobianMatrix {
        let lam = &self.eig.values;
        let n = lam.len();
        let lmin = lam[0];
        let tol = degeneracy_tol(self.eig.spectral_norm());
        let shifted: Vec<f64> = lam.iter().map(|l| l - lmin).collect();
        // column-major kernel matching faer's storage
        let kernel = Mat::from_fn(n, n, |m, k| h_kernel(shifted[m], shifted[k], tol) / self.shifted_z);
        let count = rotated.len();
        let mut jac = Mat::<f64>::zeros(count, count);
        for i in 0..count {
            for j in i..count {
                let (a, b) = (&rotated[i], &rotated[j]);
                let mut acc = 0.0;
                for col in 0..n {
                    for row in 0..n {
                        let x = a[(row, col)];
                        let y = b[(row, col)];
                        acc += (x.re * y.re + x.im * y.im) * kernel[(row, col)];
                    }
                }
                let v = -acc + e[i] * e[j];
                jac[(i, j)] = v;
                jac[(j, i)] = v;
            }
        }
        JacobianMatrix { entries: jac }
    }
}

/// Everything the inverse flow needs at one point, from one eigendecomposition.
#[derive(Clone, Debug)]
pub struct ThermalPoint {
    pub log_partition: f64,
    pub expectations: ExpectationVector,
    pub jacobian: JacobianMatrix,
    pub spectrum: ThermalSpectrum,
}

pub fn evaluate(beta: &BetaVector, set: &OperatorSet) -> Result<ThermalPoint> {
    let spectrum = ThermalSpectrum::new(beta, set)?;
    let rotated = spectrum.rotate(set);
    let e = spectrum.expectations_from_rotated(&rotated);
    let jacobian = spectrum.jacobian_from_rotated(&rotated, &e);
    Ok(ThermalPoint {
        log_partition: spectrum.log_partition(),
        expectations: ExpectationVector(e),
        jacobian,
        spectrum,
    })
}

/// `ln tr e^{-sum_i beta_i O_i}`.
pub fn log_partition(beta: &BetaVector, set: &OperatorSet) -> Result<f64> {
    Ok(ThermalSpectrum::new(beta, set)?.log_partition())
}

/// `rho_beta = e^{-beta·O} / Z`.
pub fn gibbs_state(beta: &BetaVector, set: &OperatorSet) -> Result<DensityMatrix> {
    Ok(ThermalSpectrum::new(beta, set)?.state())
}

/// `E_i(beta) = tr(O_i rho_beta)`.
pub fn expectation_map(beta: &BetaVector, set: &OperatorSet) -> Result<ExpectationVector> {
    Ok(ThermalSpectrum::new(beta, set)?.expectations(set))
}

/// Spectral Jacobian
/// `J_ij = -(1/Z) sum_{m,n} <m|O_i|n><n|O_j|m> h(λ_m, λ_n) + E_i E_j`.
pub fn jacobian(beta: &BetaVector, set: &OperatorSet) -> Result<JacobianMatrix> {
    Ok(evaluate(beta, set)?.jacobian)
}

/// Von Neumann entropy `-sum p ln p`, with `0 ln 0 = 0`.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}
