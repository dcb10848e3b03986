//! Thin dense helpers over `nalgebra`, with singular value and symmetric eigenvalue
//! decompositions delegated to `faer`.

use nalgebra::DMatrix;

pub type Matrix = DMatrix<f64>;

/// Determinant via partial-pivot LU; the empty matrix has determinant 1.
pub fn det(m: &Matrix) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Singular values sorted descending.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut v = to_faer(m).singular_values().expect("SVD converges");
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn to_faer(m: &Matrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = U diag(s) V^T` with `s` descending.
pub fn thin_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let svd = to_faer(m).thin_svd().expect("SVD converges");
    let s: Vec<f64> = (0..m.nrows().min(m.ncols())).map(|i| svd.S()[i]).collect();
    (from_faer(svd.U()), s, from_faer(svd.V()).transpose())
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; eigenvector `i` is column `i`.
pub fn symmetric_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Matrix::zeros(0, 0));
    }
    let eig = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigensolver converges");
    let s = eig.S();
    let raw: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let u = eig.U();
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Submatrix made of the listed columns, in the given order.
pub fn select_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Submatrix made of the listed rows, in the given order.
pub fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

/// Submatrix `m[rows, cols]`.
pub fn select(m: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Numerical rank: singular values above `rel_tol * max(1, sigma_max)`.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Largest absolute difference between two descending multisets, zero-padding the shorter one.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_empty_and_identity() {
        assert_eq!(det(&Matrix::zeros(0, 0)), 1.0);
        assert!((det(&Matrix::identity(4, 4)) - 1.0).abs() < 1e-15);
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!((det(&m) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn svd_sorted_and_rank() {
        let m = Matrix::from_row_slice(2, 3, &[3.0, 0.0, 0.0, 0.0, 4.0, 0.0]);
        let sv = singular_values(&m);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        assert_eq!(rank(&m, 1e-12), 2);
        assert!(singular_values(&Matrix::zeros(0, 3)).is_empty());
    }

    #[test]
    fn eigen_ascending() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v = vecs.column(1);
        assert!((v[0] - v[1]).abs() < 1e-14);
    }

    #[test]
    fn multiset_padding() {
        assert_eq!(multiset_distance(&[1.0, 0.5], &[0.5, 1.0, 0.0]), 0.0);
        assert!((multiset_distance(&[1.0], &[1.0, 0.25]) - 0.25).abs() < 1e-15);
    }
}
