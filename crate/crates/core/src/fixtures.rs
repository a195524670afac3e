//! Small operator sets with known expectation geometry.

use faer::c64;

use crate::linalg::{HermitianOperator, OperatorSet};

/// `(σ_x, σ_y, σ_z)`; `E_S` is the unit ball.
pub fn pauli_set() -> OperatorSet {
    let zero = c64::new(0.0, 0.0);
    let one = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    let x = HermitianOperator::from_fn(2, |r, c| if r != c { one } else { zero }).unwrap();
    let y = HermitianOperator::from_fn(2, |r, c| match (r, c) {
        (0, 1) => -i,
        (1, 0) => i,
        _ => zero,
    })
    .unwrap();
    let z = HermitianOperator::from_diagonal(&[1.0, -1.0]);
    OperatorSet::with_labels(vec![x, y, z], vec!["sx".into(), "sy".into(), "sz".into()]).unwrap()
}

/// Two real operators on `R^3` whose range has a flat face: the minimum
/// eigenvalue `-1` of the first operator is doubly degenerate, so the
/// supporting line `x_1 = -1` touches `E_S` in the segment `|x_2| <= 1`.
///
/// ```text
/// O1 = diag(-1, -1, 2)      O2 = [[0,1,1],[1,0,0],[1,0,0]]
/// ```
pub fn degenerate_face_pair() -> OperatorSet {
    let o1 = HermitianOperator::from_diagonal(&[-1.0, -1.0, 2.0]);
    let o2 = HermitianOperator::from_real_rows(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]).unwrap();
    OperatorSet::new(vec![o1, o2]).unwrap()
}
