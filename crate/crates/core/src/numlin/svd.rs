use nalgebra::SVD;

use super::{ComplexMatrix, NumlinError};

const SVD_MAX_ITER_PER_DIM: usize = 1000;

/// Singular values in descending order; `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, NumlinError> {
    let k = m.rows().min(m.cols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let svd =
        SVD::try_new(m.as_nalgebra().clone(), false, false, f64::EPSILON, SVD_MAX_ITER_PER_DIM * k).ok_or(NumlinError::NoConvergence {
            routine: "singular_values",
        })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Schatten p-norm `(Σ s_j^p)^{1/p}`; `p = f64::INFINITY` gives the largest singular value.
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64, NumlinError> {
    if p.is_nan() || p < 1.0 {
        return Err(NumlinError::InvalidOrder { p });
    }
    let s = singular_values(m)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(top);
    }
    // factor out s_1 so large p cannot overflow
    let sum: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Orthonormal basis of the column span, numerical rank set by `s_j > rank_tol·s_1`.
///
/// A zero input yields a `rows × 0` matrix.
pub fn orthonormal_basis(columns: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix, NumlinError> {
    let rows = columns.rows();
    if columns.cols() == 0 || rows == 0 || columns.max_abs() == 0.0 {
        return Ok(ComplexMatrix::zeros(rows, 0));
    }
    let k = rows.min(columns.cols());
    let svd = SVD::try_new(columns.as_nalgebra().clone(), true, false, f64::EPSILON, SVD_MAX_ITER_PER_DIM * k).ok_or(
        NumlinError::NoConvergence {
            routine: "orthonormal_basis",
        },
    )?;
    let u = svd.u.expect("left singular vectors requested");
    let s = &svd.singular_values;
    let top = s.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&j| s[j] > rank_tol * top).collect();
    Ok(ComplexMatrix::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])]))
}
