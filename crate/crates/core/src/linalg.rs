//! Dense helpers shared by the spectral and impact code.
//!
//! The impact formulas are written with elementwise products that broadcast a
//! vector across the rows or columns of a matrix. The helpers here spell those
//! broadcasts out explicitly so call sites read close to the formulas.

use nalgebra::{DMatrix, DVector};

/// `a · bᵀ` for column vectors, i.e. the rank-one matrix with entries `a_i b_j`.
pub fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose()
}

/// Multiplies row `i` of `m` by `v[i]` (broadcast of a column vector).
pub fn scale_rows(m: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    assert_eq!(m.nrows(), v.len());
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * v[i])
}

/// Multiplies column `j` of `m` by `v[j]` (broadcast of a row vector).
pub fn scale_cols(m: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    assert_eq!(m.ncols(), v.len());
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * v[j])
}

pub fn hadamard(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.component_mul(b)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn without_row(m: &DMatrix<f64>, row: usize) -> DMatrix<f64> {
    m.clone().remove_row(row)
}

pub fn without_row_col(m: &DMatrix<f64>, row: usize, col: usize) -> DMatrix<f64> {
    m.clone().remove_row(row).remove_column(col)
}

/// Determinant through LU with partial pivoting. Returns 1 for the empty matrix.
pub fn det(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square());
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Determinant of `m` after scaling every row to unit Euclidean norm.
///
/// The value lies in [-1, 1] (Hadamard's inequality), which keeps residuals
/// comparable across spectra of very different magnitude. A zero row yields 0.
pub fn row_normalized_det(m: &DMatrix<f64>) -> f64 {
    let mut scaled = m.clone();
    for mut row in scaled.row_iter_mut() {
        let n = row.norm();
        if n == 0.0 {
            return 0.0;
        }
        row /= n;
    }
    det(&scaled)
}

/// Classical adjugate by cofactors, `adj(A) = Cᵀ`.
pub fn adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |i, j| {
        // adj_ij = (-1)^(i+j) det(A with row j and column i removed)
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * det(&without_row_col(m, j, i))
    })
}

/// Ratio of smallest to largest singular value; 0 for a zero matrix.
pub fn singular_value_gap(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Copy of `m` with every nonzero column scaled to unit Euclidean norm.
pub fn normalize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    out
}

/// Copy of `m` with every nonzero column, then every nonzero row, scaled to unit norm.
pub fn equilibrate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = normalize_columns(m);
    for mut row in out.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
    out
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> Option<(usize, usize, f64)> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > tol {
                return Some((i, j, d));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_times_matrix_is_det_identity() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 0.3, 4.0, 1.0, -2.0, 0.1, 3.0]);
        let prod = adjugate(&a) * &a;
        let d = det(&a);
        let expect = DMatrix::identity(3, 3) * d;
        assert!(max_abs(&(prod - expect)) < 1e-12);
    }

    #[test]
    fn normalized_det_is_scale_free() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 1.0, 0.0]);
        let mut b = a.clone();
        b.row_mut(0).scale_mut(1e6);
        assert!((row_normalized_det(&a) - row_normalized_det(&b)).abs() < 1e-15);
        assert!((row_normalized_det(&a) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn broadcasts_match_diagonal_products() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = DVector::from_vec(vec![2.0, -1.0]);
        let c = DVector::from_vec(vec![1.0, 0.0, -1.0]);
        assert_eq!(scale_rows(&m, &r), DMatrix::from_diagonal(&r) * &m);
        assert_eq!(scale_cols(&m, &c), &m * DMatrix::from_diagonal(&c));
    }
}
