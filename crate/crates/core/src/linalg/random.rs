//! Seeded random ensembles used by tests, benchmarks and the CLI.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, HermitianOperator};
use crate::error::{AtlasError, Result};

fn complex_normal(rng: &mut ChaCha8Rng) -> c64 {
    c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Gaussian-unitary-ensemble sample `(G + G^†) / 2` with i.i.d. standard
/// complex Gaussian `G`.
pub fn random_hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    if dim == 0 {
        return Err(AtlasError::Domain("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(dim, dim, |_, _| complex_normal(&mut rng));
    let h = Mat::from_fn(dim, dim, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    Ok(HermitianOperator::from_mat_unchecked(h))
}

/// Normalized Wishart sample `G G^† / tr(G G^†)` with `G` of shape `dim x rank`.
pub fn random_density(dim: usize, seed: u64, rank: usize) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(AtlasError::Domain(format!("invalid rank {rank} for dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(dim, rank, |_, _| complex_normal(&mut rng));
    let w = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| w[(i, i)].re).sum();
    let rho = Mat::from_fn(dim, dim, |i, j| {
        let z = (w[(i, j)] + w[(j, i)].conj()) * (0.5 / tr);
        if i == j {
            c64::new(z.re, 0.0)
        } else {
            z
        }
    });
    Ok(DensityMatrix::from_mat_unchecked(rho))
}

/// Uniformly distributed point on the unit sphere in `R^n`.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
