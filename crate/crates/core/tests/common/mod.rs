//! Reference implementations used as independent oracles by the integration tests.
#![allow(dead_code)]

use expectation_atlas::c64;
use expectation_atlas::gibbs::{expectation_map, BetaVector};
use expectation_atlas::linalg::{random_hermitian, HermitianOperator, OperatorSet};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Traceless GUE sample scaled so that `tr(O^2) = N`.
pub fn traceless_random(dim: usize, seed: u64) -> HermitianOperator {
    let h = random_hermitian(dim, seed).unwrap();
    let shift = h.trace() / dim as f64;
    let centered = h.add_scaled(-shift, &HermitianOperator::identity(dim));
    let scale = (dim as f64).sqrt() / centered.frobenius_norm();
    centered.scaled(scale)
}

pub fn random_set(dim: usize, count: usize, seed: u64) -> OperatorSet {
    OperatorSet::new((0..count as u64).map(|k| traceless_random(dim, seed * 1000 + k)).collect()).unwrap()
}

pub fn diagonal_set(diagonals: &[Vec<f64>]) -> OperatorSet {
    let ops = diagonals
        .iter()
        .map(|d| {
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let centered: Vec<f64> = d.iter().map(|v| v - mean).collect();
            HermitianOperator::from_diagonal(&centered)
        })
        .collect();
    OperatorSet::new(ops).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

fn one_norm(m: &Mat<c64>) -> f64 {
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5_f64.powi(squarings as i32);
    let scaled = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let mut result = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled;
        let inv = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * inv);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn trace(m: &Mat<c64>) -> c64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Central finite-difference Jacobian of the expectation map.
pub fn fd_jacobian(beta: &[f64], set: &OperatorSet, h: f64) -> Vec<Vec<f64>> {
    let n = beta.len();
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut plus = beta.to_vec();
        let mut minus = beta.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let ep = expectation_map(&BetaVector::new(plus).unwrap(), set).unwrap();
        let em = expectation_map(&BetaVector::new(minus).unwrap(), set).unwrap();
        for i in 0..n {
            jac[i][j] = (ep.as_slice()[i] - em.as_slice()[i]) / (2.0 * h);
        }
    }
    jac
}

/// Cholesky test for positive definiteness of a real symmetric matrix.
pub fn is_positive_definite(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise convex hull by Andrew's monotone chain; collinear points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Euclidean distance from `p` to a counterclockwise convex polygon, 0 inside.
pub fn polygon_distance(p: [f64; 2], hull: &[[f64; 2]]) -> f64 {
    let n = hull.len();
    let inside = (0..n).all(|k| cross(hull[k], hull[(k + 1) % n], p) >= 0.0);
    if inside {
        return 0.0;
    }
    (0..n).map(|k| segment_distance(p, hull[k], hull[(k + 1) % n])).fold(f64::INFINITY, f64::min)
}
