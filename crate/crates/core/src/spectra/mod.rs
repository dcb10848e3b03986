//! Singular values of matricizations: dense and per-sector SVD, the compound-matrix
//! block formula for determinants, the ordering-dependent prefactor and the
//! inversion-symmetry check.

mod compound;
mod tt;
mod weyl;

pub use compound::{compound_matrix, modified_cauchy_binet};
pub use tt::{tt_decompose, TtCore, TtDecomposition};
pub use weyl::{random_composition, weyl_bound_check, WeylAssignment};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::combinatorics::binomial;
use crate::linalg::{det, singular_values, symmetric_eigen, Matrix};
use crate::tensor::{reshape, sector_blocks, OccupationTensor, PartialIsometry};

/// Values at or below `RANK_TOL * sigma_max` are numerically zero.
pub const RANK_TOL: f64 = 1e-12;
/// Smallest singular value a column block must exceed to count as full rank.
pub const FULL_RANK_TOL: f64 = 1e-10;
/// Prefactors below this are indistinguishable from zero in double precision; the
/// inversion residual is measured against it instead of against the prefactor.
pub const PREFACTOR_RESOLUTION: f64 = 1e-14;

/// Sorted singular values of one cut.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSpectrum {
    pub cut: usize,
    pub modes: usize,
    pub particles: Option<usize>,
    /// Descending, zero-padded to `min(2^k, 2^(L-k))` entries.
    pub values: Vec<f64>,
    pub rank: usize,
    pub prefactor: Option<f64>,
}

impl CutSpectrum {
    fn from_values(cut: usize, modes: usize, particles: Option<usize>, mut values: Vec<f64>) -> Self {
        let dim = 1usize << cut.min(modes - cut);
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        values.sort_by(|a, b| b.total_cmp(a));
        values.resize(dim, 0.0);
        let top = values[0];
        let rank = values.iter().filter(|&&v| v > RANK_TOL * top).count();
        Self { cut, modes, particles, values, rank, prefactor: None }
    }

    pub fn with_prefactor(mut self, p: f64) -> Self {
        self.prefactor = Some(p);
        self
    }

    /// `min(2^k, 2^N, 2^(L-N), 2^(L-k))`, the number of nonzero values of a generic
    /// determinant; the `L - N` term only binds beyond half filling.
    pub fn generic_rank(&self) -> Option<usize> {
        let n = self.particles?;
        let exp = self.cut.min(n).min(self.modes - n).min(self.modes - self.cut);
        Some(1usize << exp)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Count of values strictly above an absolute threshold.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v > threshold).count()
    }
}

/// Spectrum of the full `2^k x 2^(L-k)` matricization.
pub fn cut_spectrum_dense(t: &OccupationTensor, k: usize) -> Result<CutSpectrum> {
    let m = reshape(t, k)?;
    Ok(CutSpectrum::from_values(k, t.modes(), t.particles(), singular_values(&m)))
}

/// Same multiset as [`cut_spectrum_dense`], from an SVD of each particle-number block.
pub fn cut_spectrum_sectors(t: &OccupationTensor, k: usize) -> Result<CutSpectrum> {
    let values = sector_blocks(t, k)?
        .iter()
        .flat_map(|b| singular_values(b))
        .collect();
    Ok(CutSpectrum::from_values(k, t.modes(), t.particles(), values))
}

/// Spectrum of every cut `1..L`, per-sector when the particle number is definite.
pub fn all_cut_spectra(t: &OccupationTensor) -> Result<Vec<CutSpectrum>> {
    (1..t.modes())
        .map(|k| {
            if t.particles().is_some() {
                cut_spectrum_sectors(t, k)
            } else {
                cut_spectrum_dense(t, k)
            }
        })
        .collect()
}

fn check_cut(modes: usize, k: usize) -> Result<()> {
    if k == 0 || k >= modes {
        return Err(Error::Index(format!("cut {k} outside 1..{modes}")));
    }
    Ok(())
}

/// Prefactor of the bipartition `left | rest` of the columns of `u`, with `k = |left|`. Column order inside either block
/// does not matter.
pub fn split_prefactor(u: &PartialIsometry, left: &[usize]) -> f64 {
    let (n, l) = (u.particles(), u.modes());
    let mut left = left.to_vec();
    left.sort_unstable();
    let right: Vec<usize> = (0..l).filter(|c| !left.contains(c)).collect();
    let v = u.columns(&left);
    let w = u.columns(&right);
    prefactor_of_blocks(&v, &w, n)
}

/// Each block contributes the determinant of its smaller Gram matrix: `V^T V` when
/// `k <= N`, else `V V^T`, and likewise for `W` with `L - k`.
fn prefactor_of_blocks(v: &Matrix, w: &Matrix, n: usize) -> f64 {
    (small_gram_det(v, n) * small_gram_det(w, n)).max(0.0)
}

fn small_gram_det(x: &Matrix, n: usize) -> f64 {
    if x.ncols() == n {
        det(x).powi(2)
    } else if x.ncols() < n {
        det(&(x.transpose() * x))
    } else {
        det(&(x * x.transpose()))
    }
}

/// Prefactor `p(k, L, N)` of the cut after the first `k` sites.
pub fn prefactor(u: &PartialIsometry, k: usize) -> Result<f64> {
    check_cut(u.modes(), k)?;
    let (v, w) = u.split(k);
    Ok(prefactor_of_blocks(&v, &w, u.particles()))
}

/// Largest relative deviation of `sigma_j^2 sigma_(d+1-j)^2` from the prefactor, over
/// `j = 1..d` with `d = min(2^k, 2^N, 2^(L-k))`. Values at or below the rank threshold
/// count as exact zeros.
pub fn check_inversion_symmetry(s: &CutSpectrum) -> Result<f64> {
    let p = s
        .prefactor
        .ok_or_else(|| Error::Validation("spectrum carries no prefactor".into()))?;
    let d = s
        .generic_rank()
        .ok_or_else(|| Error::Validation("spectrum has no definite particle number".into()))?
        .min(s.values.len());
    let floor = RANK_TOL * s.values[0];
    let sig = |j: usize| {
        let v = s.values[j];
        if v > floor {
            v
        } else {
            0.0
        }
    };
    let scale = p.max(PREFACTOR_RESOLUTION);
    Ok((0..d)
        .map(|j| {
            let prod = (sig(j) * sig(d - 1 - j)).powi(2);
            (prod - p).abs() / scale
        })
        .fold(0.0, f64::max))
}

/// Spectrum of a determinant at cut `k` from the compound-matrix block formula; needs
/// both column blocks at full rank.
///
/// With `W W^T = R R^T` (Cholesky), `C_j C_j^T = det(W W^T) Lambda^j(X)^T Lambda^j(X)` for
/// `X = R^-1 V`, so the values of block `j` are `sqrt(det(W W^T))` times the singular
/// values of `Lambda^j(X)`. The mirrored form with `V V^T` serves `k >= N`; cuts with
/// `L - N < k < N` go through the complementary determinant of the `L - N` holes.
pub fn slater_cut_spectrum_block(u: &PartialIsometry, k: usize) -> Result<CutSpectrum> {
    let (n, l) = (u.particles(), u.modes());
    check_cut(l, k)?;
    let (v, w) = u.split(k);
    check_full_rank(&v, n.min(k), "left")?;
    check_full_rank(&w, n.min(l - k), "right")?;

    let row_form = k + n <= l;
    let col_form = k >= n;
    if !row_form && !col_form {
        // Holes of the complementary determinant: same spectrum, and k + (L - N) <= L.
        let holes = slater_cut_spectrum_block(&complement(u)?, k)?;
        let p = prefactor_of_blocks(&v, &w, n);
        return Ok(CutSpectrum::from_values(k, l, Some(n), holes.values).with_prefactor(p));
    }
    let row = if row_form { Some(whiten(&w, &v)?) } else { None };
    let col = if col_form { Some(whiten(&v, &w)?) } else { None };

    let mut values = Vec::with_capacity(1 << k.min(l - k));
    for j in 0..=k.min(n) {
        if n - j > l - k {
            continue;
        }
        let row_size = binomial(n, j) * binomial(k, j);
        let col_size = binomial(n, n - j) * binomial(l - k, n - j);
        let (scale, compound) = match (&row, &col) {
            (Some((s, x)), Some(_)) if row_size <= col_size => (*s, compound_matrix(x, j)?),
            (Some((s, x)), None) => (*s, compound_matrix(x, j)?),
            (_, Some((s, y))) => (*s, compound_matrix(y, n - j)?),
            (None, None) => unreachable!(),
        };
        values.extend(singular_values(&compound).into_iter().map(|x| scale * x));
    }
    let p = prefactor_of_blocks(&v, &w, n);
    Ok(CutSpectrum::from_values(k, l, Some(n), values).with_prefactor(p))
}

/// Orthonormal rows spanning the orthogonal complement of the rows of `u`.
fn complement(u: &PartialIsometry) -> Result<PartialIsometry> {
    let (n, l) = (u.particles(), u.modes());
    let m = u.matrix();
    let projector = Matrix::identity(l, l) - m.transpose() * m;
    let (_, vecs) = symmetric_eigen(&projector);
    PartialIsometry::new(Matrix::from_fn(l - n, l, |r, c| vecs[(c, n + r)]))
}

/// `(sqrt(det(g g^T)), R^-1 h)` for the Cholesky factor `R` of `g g^T`.
fn whiten(g: &Matrix, h: &Matrix) -> Result<(f64, Matrix)> {
    let chol = (g * g.transpose())
        .cholesky()
        .ok_or_else(|| Error::Consistency("Gram matrix is not positive definite".into()))?;
    let r = chol.l();
    let scale: f64 = r.diagonal().iter().product();
    let x = r
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Consistency("singular Cholesky factor".into()))?;
    Ok((scale.abs(), x))
}

fn check_full_rank(m: &Matrix, required: usize, side: &'static str) -> Result<()> {
    let sv = singular_values(m);
    let rank = sv.iter().filter(|&&s| s > FULL_RANK_TOL).count();
    if rank < required {
        return Err(Error::Degenerate { side, rank, required });
    }
    Ok(())
}
