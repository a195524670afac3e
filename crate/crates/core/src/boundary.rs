//! Geometry of the expectation body `E_S`: support values, faces, traced
//! boundaries, outer half-space approximations, the commuting-case polytope
//! and the eigenset.

use std::f64::consts::PI;

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::error::{AtlasError, Result};
use crate::gibbs::ExpectationVector;
use crate::linalg::{commutator_norm, eig_hermitian, random_unit_vector, EigenDecomposition, HermitianOperator, OperatorSet};

/// Slack on `ê·x >= λ_min(O_ê)` in [`OuterHull::contains`].
pub const HULL_SLACK: f64 = 1e-9;
/// Joint eigenvalues closer than this (max-norm) are merged in [`commuting_polytope`].
pub const VERTEX_MERGE_TOL: f64 = 1e-9;

/// Renormalized copy of `e`; rejects the zero vector.
pub fn unit_direction(e: &[f64]) -> Result<Vec<f64>> {
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || norm < 1e-300 {
        return Err(AtlasError::Domain(format!("direction must be a finite nonzero vector, got {e:?}")));
    }
    Ok(e.iter().map(|v| v / norm).collect())
}

fn check_direction(e: &[f64], n: usize) -> Result<Vec<f64>> {
    if e.len() != n {
        return Err(AtlasError::Domain(format!("direction has {} components, operator set has {n}", e.len())));
    }
    unit_direction(e)
}

/// `λ_min(sum_i ê_i O_i)` after renormalizing `ê`.
pub fn support_value(e: &[f64], set: &OperatorSet) -> Result<f64> {
    let e = check_direction(e, set.len())?;
    Ok(set.direction_operator(&e).eigenvalues()?[0])
}

/// `v^† O_i v` for every operator.
fn expectation_in(ops: &[HermitianOperator], v: faer::ColRef<'_, c64>) -> Vec<f64> {
    ops.iter()
        .map(|o| {
            let ov = o.as_mat() * v;
            (0..v.nrows()).map(|i| (v[i].conj() * ov[i]).re).sum()
        })
        .collect()
}

/// The face of `E_S` where `ê·x` is minimal.
#[derive(Clone, Debug)]
pub struct BoundaryFace {
    pub direction: Vec<f64>,
    pub support: f64,
    /// Dimension of the ground space of `O_ê`.
    pub ground_dim: usize,
    /// The unique face point when `ground_dim == 1`.
    pub point: Option<ExpectationVector>,
    /// `V_g^† O_i V_g` on an orthonormal ground-space basis `V_g` when
    /// `ground_dim > 1`; the face is the expectation body of these operators.
    pub projected_set: Option<Vec<HermitianOperator>>,
}

fn face_from_eig(direction: Vec<f64>, ops: &[HermitianOperator], eig: &EigenDecomposition) -> Result<BoundaryFace> {
    let m = eig.ground_multiplicity();
    let support = eig.values[0];
    let ground = eig.vectors.as_ref().subcols(0, m);
    if m == 1 {
        let point = ExpectationVector::new(expectation_in(ops, ground.col(0)))?;
        return Ok(BoundaryFace { direction, support, ground_dim: 1, point: Some(point), projected_set: None });
    }
    let projected = ops
        .iter()
        .map(|o| {
            let p = ground.adjoint() * (o.as_mat() * ground);
            HermitianOperator::from_mat_unchecked(Mat::from_fn(m, m, |i, j| (p[(i, j)] + p[(j, i)].conj()) * 0.5))
        })
        .collect();
    Ok(BoundaryFace { direction, support, ground_dim: m, point: None, projected_set: Some(projected) })
}

/// Face of the expectation body of an arbitrary operator list.
///
/// Applied to a `projected_set` this descends one level into a degenerate face.
pub fn face_of(e: &[f64], ops: &[HermitianOperator]) -> Result<BoundaryFace> {
    if ops.is_empty() || e.len() != ops.len() {
        return Err(AtlasError::Domain(format!("direction has {} components for {} operators", e.len(), ops.len())));
    }
    let e = unit_direction(e)?;
    let eig = eig_hermitian(&HermitianOperator::linear_combination(&e, ops))?;
    face_from_eig(e, ops, &eig)
}

pub fn face(e: &[f64], set: &OperatorSet) -> Result<BoundaryFace> {
    let e = check_direction(e, set.len())?;
    face_of(&e, set.ops())
}

/// One emitted point of a traced boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub theta: f64,
    pub point: [f64; 2],
    pub support: f64,
    pub ground_dim: usize,
}

/// `θ_k = 2πk / num_dirs`.
pub fn uniform_angles(num_dirs: usize) -> Vec<f64> {
    (0..num_dirs).map(|k| 2.0 * PI * k as f64 / num_dirs as f64).collect()
}

/// Endpoints of a flat face of a two-operator body, counterclockwise.
fn segment_endpoints(face: &BoundaryFace) -> Result<[[f64; 2]; 2]> {
    let e = &face.direction;
    let tangent = [-e[1], e[0]];
    let ops = face.projected_set.as_ref().expect("degenerate face carries its projected set");
    let along = HermitianOperator::linear_combination(&tangent, ops).eigenvalues()?;
    let at = |lam: f64| [face.support * e[0] + lam * tangent[0], face.support * e[1] + lam * tangent[1]];
    Ok([at(along[along.len() - 1]), at(along[0])])
}

fn check_pair(set: &OperatorSet, num_dirs: usize) -> Result<()> {
    if set.len() != 2 {
        return Err(AtlasError::Unsupported(format!(
            "boundary tracing needs exactly 2 operators, got {}; use an outer hull for more",
            set.len()
        )));
    }
    if num_dirs < 8 {
        return Err(AtlasError::Domain(format!("need at least 8 directions, got {num_dirs}")));
    }
    Ok(())
}

/// Faces for `ê_θ = (cos θ, sin θ)` over `num_dirs` uniform angles, in `θ` order.
pub fn trace_faces(set: &OperatorSet, num_dirs: usize) -> Result<Vec<(f64, BoundaryFace)>> {
    check_pair(set, num_dirs)?;
    uniform_angles(num_dirs)
        .into_par_iter()
        .map(|theta| Ok((theta, face(&[theta.cos(), theta.sin()], set)?)))
        .collect()
}

/// Counterclockwise boundary points of a two-operator body. Flat faces
/// contribute both segment endpoints.
pub fn trace_boundary(set: &OperatorSet, num_dirs: usize) -> Result<Vec<TracePoint>> {
    let mut out = Vec::with_capacity(num_dirs);
    for (theta, f) in trace_faces(set, num_dirs)? {
        let points = match &f.point {
            Some(p) => vec![[p.as_slice()[0], p.as_slice()[1]]],
            None => segment_endpoints(&f)?.to_vec(),
        };
        out.extend(points.into_iter().map(|point| TracePoint { theta, point, support: f.support, ground_dim: f.ground_dim }));
    }
    Ok(out)
}

/// Sampled half-space description `{x : ê·x >= λ_min(O_ê)}`.
///
/// Every point of `E_S` is contained; a rejected point is certainly outside.
#[derive(Clone, Debug)]
pub struct OuterHull {
    rows: Vec<(Vec<f64>, f64)>,
}

impl OuterHull {
    pub fn rows(&self) -> &[(Vec<f64>, f64)] {
        &self.rows
    }

    /// `max_ê (λ_min(O_ê) − ê·x)`; positive means outside.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|(e, s)| s - e.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.violation(x) <= HULL_SLACK
    }
}

pub fn sampled_outer_hull(set: &OperatorSet, dirs: &[Vec<f64>]) -> Result<OuterHull> {
    if dirs.is_empty() {
        return Err(AtlasError::Domain("outer hull needs at least one direction".into()));
    }
    let rows = dirs
        .par_iter()
        .map(|d| {
            let e = check_direction(d, set.len())?;
            let s = set.direction_operator(&e).eigenvalues()?[0];
            Ok((e, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OuterHull { rows })
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

/// Deterministic, low-discrepancy unit vectors in `R^n`.
///
/// Point `k` uses Halton index `seed + k + 1` in the first `2⌈n/2⌉` prime
/// bases, mapped to Gaussian coordinates by Box-Muller and normalized.
/// For `n = 2` the directions are the uniform angles `2πk / count` instead.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 || n > 2 * PRIMES.len() {
        return Err(AtlasError::Unsupported(format!("direction sampling supports 1..={} components, got {n}", 2 * PRIMES.len())));
    }
    if n == 1 {
        return Ok([1.0, -1.0].into_iter().cycle().take(count).map(|s| vec![s]).collect());
    }
    if n == 2 {
        return Ok(uniform_angles(count).into_iter().map(|t| vec![t.cos(), t.sin()]).collect());
    }
    let pairs = n.div_ceil(2);
    Ok((0..count as u64)
        .map(|k| {
            let index = seed + k + 1;
            let mut g = Vec::with_capacity(2 * pairs);
            for p in 0..pairs {
                let u1 = radical_inverse(index, PRIMES[2 * p]);
                let u2 = radical_inverse(index, PRIMES[2 * p + 1]);
                let r = (-2.0 * u1.ln()).sqrt();
                g.push(r * (2.0 * PI * u2).cos());
                g.push(r * (2.0 * PI * u2).sin());
            }
            g.truncate(n);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            g.into_iter().map(|v| v / norm).collect()
        })
        .collect())
}

fn max_commutator(set: &OperatorSet) -> f64 {
    let ops = set.ops();
    let mut worst = 0.0_f64;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            worst = worst.max(commutator_norm(&ops[i], &ops[j]));
        }
    }
    worst
}

/// Vertices of `E_S` for pairwise commuting operators: the joint eigenvalue
/// tuples, in the eigenvalue order of a fixed generic combination.
pub fn commuting_polytope(set: &OperatorSet, tol: f64) -> Result<Vec<ExpectationVector>> {
    let worst = max_commutator(set);
    if worst >= tol {
        return Err(AtlasError::Precondition(format!(
            "operators do not commute: max ‖[O_i, O_j]‖_F = {worst:.3e} >= {tol:.3e}"
        )));
    }
    let mix = random_unit_vector(set.len(), 0x5eed);
    let eig = set.direction_operator(&mix).eig()?;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for k in 0..eig.dim() {
        let p = expectation_in(set.ops(), eig.vectors.as_ref().col(k));
        let duplicate = vertices
            .iter()
            .any(|v| v.iter().zip(&p).all(|(a, b)| (a - b).abs() < VERTEX_MERGE_TOL));
        if !duplicate {
            vertices.push(p);
        }
    }
    vertices.into_iter().map(ExpectationVector::new).collect()
}

/// `(ê, k, v_k^† O v_k)` for an eigenvector `v_k` of `O_ê`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigensetPoint {
    pub theta: f64,
    pub direction: [f64; 2],
    pub level: usize,
    pub eigenvalue: f64,
    pub point: [f64; 2],
}

/// Expectations of every eigenvector of `O_ê` over `num_dirs` uniform angles.
pub fn eigenset(set: &OperatorSet, num_dirs: usize) -> Result<Vec<EigensetPoint>> {
    check_pair(set, num_dirs)?;
    let per_dir = uniform_angles(num_dirs)
        .into_par_iter()
        .map(|theta| {
            let direction = [theta.cos(), theta.sin()];
            let eig = set.direction_operator(&direction).eig()?;
            Ok((0..eig.dim())
                .map(|k| {
                    let p = expectation_in(set.ops(), eig.vectors.as_ref().col(k));
                    EigensetPoint { theta, direction, level: k, eigenvalue: eig.values[k], point: [p[0], p[1]] }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_dir.into_iter().flatten().collect())
}
