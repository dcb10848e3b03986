use crate::combinatorics::subsets;
use crate::error::{Error, Result};
use crate::linalg::{det, select, Matrix};

/// `j`-th compound matrix: all `j x j` minors of `a`, rows and columns indexed by
/// `j`-subsets in lexicographic order.
pub fn compound_matrix(a: &Matrix, j: usize) -> Result<Matrix> {
    let (m, n) = a.shape();
    if j > m.min(n) {
        return Err(Error::Index(format!("order {j} exceeds dimensions {m}x{n}")));
    }
    let rows = subsets(&(0..m).collect::<Vec<_>>(), j);
    let cols = subsets(&(0..n).collect::<Vec<_>>(), j);
    Ok(Matrix::from_fn(rows.len(), cols.len(), |r, c| det(&select(a, &rows[r], &cols[c]))))
}

/// Both sides of the subset-restricted Cauchy-Binet identity for `A` (`m x n`),
/// `B` (`n x m`) and a partition of the column indices into `t` and `rest`:
///
/// `sum_{S in rest, |S| = m - j} det A[:, S+T] det B[S+T, :]`
/// `= (-1)^j det [[0, B[T, :]], [A[:, T], A[:, rest] B[rest, :]]]`, `j = |T|`.
pub fn modified_cauchy_binet(
    a: &Matrix,
    b: &Matrix,
    t: &[usize],
    rest: &[usize],
) -> Result<(f64, f64)> {
    let (m, n) = a.shape();
    if b.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "A is {m}x{n} but B is {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    let j = t.len();
    if j + rest.len() != n {
        return Err(Error::Dimension(format!(
            "|T| + |U| = {} must equal n = {n}",
            j + rest.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in t.iter().chain(rest) {
        if i >= n || seen[i] {
            return Err(Error::Dimension(format!(
                "T and U must partition 0..{n}; offending index {i}"
            )));
        }
        seen[i] = true;
    }
    if j > m {
        return Err(Error::Dimension(format!("|T| = {j} exceeds m = {m}")));
    }
    let rows: Vec<usize> = (0..m).collect();

    let mut lhs = 0.0;
    if m - j <= rest.len() {
        for s in subsets(rest, m - j) {
            let mut cols: Vec<usize> = s.iter().chain(t).copied().collect();
            cols.sort_unstable();
            lhs += det(&select(a, &rows, &cols)) * det(&select(b, &cols, &rows));
        }
    }

    let a_t = select(a, &rows, t);
    let b_t = select(b, t, &rows);
    let gram = select(a, &rows, rest) * select(b, rest, &rows);
    let size = j + m;
    let block = Matrix::from_fn(size, size, |r, c| match (r < j, c < j) {
        (true, true) => 0.0,
        (true, false) => b_t[(r, c - j)],
        (false, true) => a_t[(r - j, c)],
        (false, false) => gram[(r - j, c - j)],
    });
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    Ok((lhs, sign * det(&block)))
}
