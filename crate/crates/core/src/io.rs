//! JSON input formats and atomic artifact writing.
//!
//! An operator-set file looks like
//!
//! ```json
//! { "dim": 2,
//!   "labels": ["sx", "sz"],
//!   "operators": [ [[0, 1], [1, 0]],
//!                  [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]] ] }
//! ```
//!
//! Each matrix is a list of rows; an entry is either a real number or an
//! `[re, im]` pair. `labels` is optional. A marginal file holds two such
//! matrices under `rho_a` and `rho_b`.

use std::io::Write;
use std::path::Path;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{AtlasError, Result};
use crate::linalg::{DensityMatrix, HermitianOperator, OperatorSet};

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> c64 {
        match self {
            Entry::Real(re) => c64::new(re, 0.0),
            Entry::Complex([re, im]) => c64::new(re, im),
        }
    }
}

pub type RawMatrix = Vec<Vec<Entry>>;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub dim: usize,
    pub operators: Vec<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalFile {
    pub rho_a: RawMatrix,
    pub rho_b: RawMatrix,
}

fn to_mat(raw: &RawMatrix, what: &str) -> Result<Mat<c64>> {
    let n = raw.len();
    if let Some((r, row)) = raw.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(AtlasError::Validation(format!("{what}: row {r} has {} entries, expected {n}", row.len())));
    }
    Ok(Mat::from_fn(n, n, |i, j| raw[i][j].value()))
}

pub fn matrix_to_raw(m: MatRef<'_, c64>) -> RawMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

/// Matrix as nested `[re, im]` pairs.
pub fn matrix_to_json(m: MatRef<'_, c64>) -> serde_json::Value {
    serde_json::to_value(matrix_to_raw(m)).expect("finite matrices serialize")
}

/// Operators of a parsed file, validated individually; errors name the offending operator.
pub fn operators_from_file(file: &OperatorFile) -> Result<(Vec<HermitianOperator>, Vec<String>)> {
    if file.operators.is_empty() {
        return Err(AtlasError::Validation("operator set is empty".into()));
    }
    let labels = match &file.labels {
        Some(l) if l.len() != file.operators.len() => {
            return Err(AtlasError::Validation(format!("{} labels for {} operators", l.len(), file.operators.len())));
        }
        Some(l) => l.clone(),
        None => (1..=file.operators.len()).map(|i| format!("O{i}")).collect(),
    };
    let ops = file
        .operators
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let what = format!("operator {i} ({})", labels[i]);
            let mat = to_mat(raw, &what)?;
            if mat.nrows() != file.dim {
                return Err(AtlasError::Validation(format!("{what} has dim {} but the file declares dim {}", mat.nrows(), file.dim)));
            }
            HermitianOperator::new(mat).map_err(|e| match e {
                AtlasError::Validation(msg) => AtlasError::Validation(format!("{what}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ops, labels))
}

pub fn parse_operator_file(text: &str) -> Result<OperatorFile> {
    Ok(serde_json::from_str(text)?)
}

/// Reads and validates an operator set. With `project_traceless` each
/// operator is shifted to be traceless and the removed offsets
/// `tr(O_i)/N` are returned; otherwise the offsets are zero.
pub fn load_operator_set(path: &Path, project_traceless: bool) -> Result<(OperatorSet, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    operator_set_from_str(&text, project_traceless)
}

pub fn operator_set_from_str(text: &str, project_traceless: bool) -> Result<(OperatorSet, Vec<f64>)> {
    let file = parse_operator_file(text)?;
    let (ops, labels) = operators_from_file(&file)?;
    if project_traceless {
        OperatorSet::with_affine_split(ops, labels)
    } else {
        let n = ops.len();
        Ok((OperatorSet::with_labels(ops, labels)?, vec![0.0; n]))
    }
}

pub fn operator_set_to_file(set: &OperatorSet) -> OperatorFile {
    OperatorFile {
        dim: set.dim(),
        operators: set.ops().iter().map(|o| matrix_to_raw(o.as_mat())).collect(),
        labels: Some(set.labels().to_vec()),
    }
}

pub fn marginals_from_str(text: &str) -> Result<(DensityMatrix, DensityMatrix)> {
    let file: MarginalFile = serde_json::from_str(text)?;
    let a = DensityMatrix::new(to_mat(&file.rho_a, "rho_a")?)?;
    let b = DensityMatrix::new(to_mat(&file.rho_b, "rho_b")?)?;
    Ok((a, b))
}

pub fn load_marginals(path: &Path) -> Result<(DensityMatrix, DensityMatrix)> {
    marginals_from_str(&std::fs::read_to_string(path)?)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place,
/// so readers never observe a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| AtlasError::Io(e.error))?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}
