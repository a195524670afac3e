//! Algebraic membership and purity certificates that do not use the flow.

use faer::{c64, Mat, MatRef};

use crate::error::{AtlasError, Result};
use crate::linalg::{state_from_coords, trace_product, BasisSet, DensityMatrix, HermitianOperator, StructureTensors};

/// Residuals below this count as zero in [`PurityReport`] verdicts.
pub const PURITY_TOL: f64 = 1e-8;

/// `M_ij(x) = Z^k_ij x_k + g̃_ij − x_i x_j`, the covariance matrix
/// `tr(rho T_i T_j) − tr(rho T_i) tr(rho T_j)` written in coordinates.
#[derive(Clone, Debug)]
pub struct PositivityMatrix {
    entries: Mat<c64>,
}

impl PositivityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.entries[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        HermitianOperator::from_mat_unchecked(self.entries.clone()).eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

pub fn positivity_matrix(x: &[f64], tensors: &StructureTensors) -> Result<PositivityMatrix> {
    let len = tensors.len();
    if x.len() != len {
        return Err(AtlasError::Domain(format!("expected {len} coordinates, got {}", x.len())));
    }
    let mut entries = Mat::<c64>::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            let mut acc: c64 = (0..len).map(|k| tensors.z(k, i, j) * x[k]).sum();
            acc += c64::new(tensors.g(i, j) - x[i] * x[j], 0.0);
            entries[(i, j)] = acc;
        }
    }
    // exact Hermitian symmetry for the eigensolver
    for i in 0..len {
        for j in 0..i {
            let z = (entries[(i, j)] + entries[(j, i)].conj()) * 0.5;
            entries[(i, j)] = z;
            entries[(j, i)] = z.conj();
        }
        entries[(i, i)].im = 0.0;
    }
    Ok(PositivityMatrix { entries })
}

/// `true` iff the smallest eigenvalue of `M(x)` is at least `-tol`.
///
/// For a full traceless basis this is exact membership in the expectation body.
pub fn is_member_positivity(x: &[f64], tensors: &StructureTensors, tol: f64) -> Result<bool> {
    Ok(positivity_matrix(x, tensors)?.min_eigenvalue()? >= -tol)
}

fn check_dims(rho: &DensityMatrix, ops: &[&HermitianOperator]) -> Result<()> {
    match ops.iter().find(|o| o.dim() != rho.dim()) {
        Some(o) => Err(AtlasError::Domain(format!("operator dim {} does not match state dim {}", o.dim(), rho.dim()))),
        None => Ok(()),
    }
}

/// Second moments `(var_1, var_2, commutator term, covariance)` of a pair.
fn pair_moments(rho: &DensityMatrix, o1: &HermitianOperator, o2: &HermitianOperator) -> (f64, f64, f64, f64) {
    let r = rho.as_mat();
    let m1 = o1.expectation(rho);
    let m2 = o2.expectation(rho);
    let sq1 = o1.as_mat() * o1.as_mat();
    let sq2 = o2.as_mat() * o2.as_mat();
    let prod = o1.as_mat() * o2.as_mat();
    let var1 = trace_product(r, sq1.as_ref()).re - m1 * m1;
    let var2 = trace_product(r, sq2.as_ref()).re - m2 * m2;
    let t = trace_product(r, prod.as_ref());
    // <i[O1,O2]>/2 = -Im tr(rho O1 O2), <{O1,O2}>/2 = Re tr(rho O1 O2)
    (var1, var2, -t.im, t.re - m1 * m2)
}

/// `(ΔO₁)²(ΔO₂)² − |<i[O₁,O₂]>/2|² − |<{O₁,O₂}>/2 − <O₁><O₂>|²`; non-negative for every state.
pub fn uncertainty_residual(rho: &DensityMatrix, o1: &HermitianOperator, o2: &HermitianOperator) -> Result<f64> {
    check_dims(rho, &[o1, o2])?;
    let (v1, v2, c, cov) = pair_moments(rho, o1, o2);
    Ok(v1 * v2 - c * c - cov * cov)
}

/// `(ΔO₁)²(ΔO₂)² − <i[O₁,O₂]/2>²`, the weaker commutator-only bound.
pub fn robertson_residual(rho: &DensityMatrix, o1: &HermitianOperator, o2: &HermitianOperator) -> Result<f64> {
    check_dims(rho, &[o1, o2])?;
    let (v1, v2, c, _) = pair_moments(rho, o1, o2);
    Ok(v1 * v2 - c * c)
}

/// Residuals of three equivalent characterizations of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    /// `|sum_a x_a^2 − (N − 1)|` and `max_a |(1 − 2/N) x_a − s_abc x_b x_c|`.
    pub r_quadratic: (f64, f64),
    /// `|e_k(rho)|` for `k = 2..=N`, the characteristic-polynomial coefficients
    /// that vanish for `λ^{N−1}(λ − 1)`.
    pub r_charpoly: Vec<f64>,
    /// Largest `|rho_ik rho_jl − rho_il rho_jk|`.
    pub r_subdet: f64,
    pub pure: bool,
}

impl PurityReport {
    pub fn quadratic_pure(&self) -> bool {
        self.r_quadratic.0 < PURITY_TOL && self.r_quadratic.1 < PURITY_TOL
    }

    pub fn charpoly_pure(&self) -> bool {
        self.r_charpoly.iter().all(|r| *r < PURITY_TOL)
    }

    pub fn subdet_pure(&self) -> bool {
        self.r_subdet < PURITY_TOL
    }

    pub fn max_residual(&self) -> f64 {
        self.r_charpoly
            .iter()
            .copied()
            .chain([self.r_quadratic.0, self.r_quadratic.1, self.r_subdet])
            .fold(0.0, f64::max)
    }
}

/// Elementary symmetric polynomials `e_1..e_N` of the spectrum from power sums.
fn elementary_symmetric(power_sums: &[f64]) -> Vec<f64> {
    let n = power_sums.len();
    let mut e = vec![1.0];
    for k in 1..=n {
        let mut acc = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * power_sums[i - 1];
        }
        e.push(acc / k as f64);
    }
    e.split_off(1)
}

fn report_for(x: &[f64], rho: &HermitianOperator, basis: &BasisSet) -> Result<PurityReport> {
    let dim = basis.dim();
    let n = dim as f64;
    let eq1 = (x.iter().map(|v| v * v).sum::<f64>() - (n - 1.0)).abs();
    // s_abc x_b x_c = Re tr(T_a X^2) / N^2 with X = x_b T_b
    let big_x = HermitianOperator::linear_combination(x, basis.elements());
    let x_sq = big_x.as_mat() * big_x.as_mat();
    let eq2 = basis
        .elements()
        .iter()
        .zip(x)
        .map(|(t, xa)| ((1.0 - 2.0 / n) * xa - trace_product(t.as_mat(), x_sq.as_ref()).re / (n * n)).abs())
        .fold(0.0, f64::max);

    let r = rho.as_mat();
    let mut power = r.to_owned();
    let mut sums = Vec::with_capacity(dim);
    for m in 1..=dim {
        if m > 1 {
            power = &power * r;
        }
        sums.push((0..dim).map(|i| power[(i, i)].re).sum::<f64>());
    }
    let e = elementary_symmetric(&sums);
    let r_charpoly = e[1..].iter().map(|v| v.abs()).collect();

    let mut r_subdet = 0.0_f64;
    for i in 0..dim {
        for j in (i + 1)..dim {
            for k in 0..dim {
                for l in (k + 1)..dim {
                    let d = r[(i, k)] * r[(j, l)] - r[(i, l)] * r[(j, k)];
                    r_subdet = r_subdet.max(d.norm());
                }
            }
        }
    }
    let mut report = PurityReport {
        r_quadratic: (eq1, eq2),
        r_charpoly,
        r_subdet,
        pure: false,
    };
    report.pure = report.quadratic_pure() && report.charpoly_pure() && report.subdet_pure();
    Ok(report)
}

/// Purity residuals for the coordinates `x` of `(1/N)(1 + x_a T_a)`.
pub fn purity_report(x: &[f64], basis: &BasisSet) -> Result<PurityReport> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AtlasError::Domain("coordinates must be finite".into()));
    }
    let rho = state_from_coords(x, basis)?;
    report_for(x, &rho, basis)
}

/// Purity residuals for a density matrix.
pub fn purity_report_state(rho: &DensityMatrix, basis: &BasisSet) -> Result<PurityReport> {
    let x = crate::linalg::coords_from_state(rho, basis)?;
    report_for(&x, &rho.as_operator(), basis)
}
