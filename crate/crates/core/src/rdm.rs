//! One- and two-orbital reduced density matrices, von Neumann entropies and the
//! orbital mutual information.
//!
//! Two-orbital matrices use the basis `(00, 01, 10, 11)` where the first slot is the
//! occupation of site `i` and the second that of site `j > i`.

use crate::combinatorics::{site_bit, subsets};
use crate::error::{Error, Result};
use crate::linalg::{det, symmetric_eigen, Matrix};
use crate::tensor::{OccupationTensor, PartialIsometry};

const TRACE_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-10;
/// Mutual-information entries in `[-MI_CLAMP, 0)` are rounding noise and set to zero.
pub const MI_CLAMP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalRdm1 {
    pub site: usize,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalRdm2 {
    pub sites: (usize, usize),
    pub matrix: Matrix,
}

fn check_site(modes: usize, i: usize) -> Result<()> {
    if i >= modes {
        return Err(Error::Index(format!("site {i} out of range for {modes} modes")));
    }
    Ok(())
}

fn check_pair(modes: usize, i: usize, j: usize) -> Result<()> {
    check_site(modes, j)?;
    if i >= j {
        return Err(Error::Index(format!("need i < j, got ({i}, {j})")));
    }
    Ok(())
}

/// Partial trace over every site but `i`.
pub fn rdm1_brute(t: &OccupationTensor, i: usize) -> Result<OrbitalRdm1> {
    let l = t.modes();
    check_site(l, i)?;
    let bit = site_bit(l, i);
    let c = t.coefficients();
    let mut rho = Matrix::zeros(2, 2);
    for m in (0..c.len()).filter(|m| m & bit == 0) {
        let (a, b) = (c[m], c[m | bit]);
        rho[(0, 0)] += a * a;
        rho[(1, 1)] += b * b;
        rho[(0, 1)] += a * b;
    }
    rho[(1, 0)] = rho[(0, 1)];
    Ok(OrbitalRdm1 { site: i, matrix: rho })
}

/// Partial trace over every site but `i < j`.
pub fn rdm2_brute(t: &OccupationTensor, i: usize, j: usize) -> Result<OrbitalRdm2> {
    let l = t.modes();
    check_pair(l, i, j)?;
    let (bi, bj) = (site_bit(l, i), site_bit(l, j));
    let c = t.coefficients();
    let mut rho = [[0.0; 4]; 4];
    for m in (0..c.len()).filter(|m| m & (bi | bj) == 0) {
        let v = [c[m], c[m | bj], c[m | bi], c[m | bi | bj]];
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        for r in 0..4 {
            for s in 0..4 {
                rho[r][s] += v[r] * v[s];
            }
        }
    }
    Ok(OrbitalRdm2 {
        sites: (i, j),
        matrix: Matrix::from_fn(4, 4, |r, s| rho[r][s]),
    })
}

/// `diag(1 - |u_i|^2, |u_i|^2)`.
pub fn rdm1_slater(u: &PartialIsometry, i: usize) -> Result<OrbitalRdm1> {
    check_site(u.modes(), i)?;
    let w = u.column(i).norm_squared();
    Ok(OrbitalRdm1 {
        site: i,
        matrix: Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 - w, w])),
    })
}

/// Formula used for the `(01, 10)` coherence of a determinant's two-orbital matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoherencePath {
    /// Signed sum of bordered determinants over subsets of the sites between `i` and `j`.
    General,
    /// `j = i + 1`: `<u_i, u_j>`.
    Adjacent,
    /// `j = i + 2`: `<u_j, (Id - 2(|u_m|^2 - u_m u_m^T)) u_i>` with `m = i + 1`.
    NextNearest,
    /// `N = 2`: `<u_j, (Id - 2 sum_m (|u_m|^2 - u_m u_m^T)) u_i>` over `i < m < j`.
    TwoParticles,
}

impl CoherencePath {
    /// Cheapest formula valid for the pair.
    pub fn select(u: &PartialIsometry, i: usize, j: usize) -> Self {
        if j == i + 1 {
            Self::Adjacent
        } else if j == i + 2 {
            Self::NextNearest
        } else if u.particles() == 2 {
            Self::TwoParticles
        } else {
            Self::General
        }
    }
}

/// Off-diagonal entry `rho_ij(01, 10)` of a determinant by the requested formula.
pub fn slater_coherence(u: &PartialIsometry, i: usize, j: usize, path: CoherencePath) -> Result<f64> {
    check_pair(u.modes(), i, j)?;
    let n = u.particles();
    let (ui, uj) = (u.column(i), u.column(j));
    match path {
        CoherencePath::Adjacent => {
            if j != i + 1 {
                return Err(Error::Validation("adjacent formula needs j = i + 1".into()));
            }
            Ok(ui.dot(&uj))
        }
        CoherencePath::NextNearest | CoherencePath::TwoParticles => {
            if path == CoherencePath::NextNearest && j != i + 2 {
                return Err(Error::Validation("next-nearest formula needs j = i + 2".into()));
            }
            if path == CoherencePath::TwoParticles && n != 2 {
                return Err(Error::Validation("two-particle formula needs N = 2".into()));
            }
            let mut op = Matrix::identity(n, n);
            for m in i + 1..j {
                let um = u.column(m);
                op -= 2.0 * (um.norm_squared() * Matrix::identity(n, n) - &um * um.transpose());
            }
            Ok(uj.dot(&(op * ui)))
        }
        CoherencePath::General => Ok(general_coherence(u, i, j)),
    }
}

fn general_coherence(u: &PartialIsometry, i: usize, j: usize) -> f64 {
    let n = u.particles();
    let between: Vec<usize> = (i + 1..j).collect();
    let mut total = 0.0;
    for k in 0..=between.len() {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        for gamma in subsets(&between, k) {
            let gamma_c: Vec<usize> = between.iter().copied().filter(|m| !gamma.contains(m)).collect();
            let left: Vec<usize> = std::iter::once(i).chain(gamma.iter().copied()).collect();
            let top: Vec<usize> = gamma.iter().copied().chain(std::iter::once(j)).collect();
            let a = u.columns(&left);
            let b = u.columns(&top);
            let gc = u.columns(&gamma_c);
            let core = Matrix::identity(n, n) - &gc * gc.transpose();
            let size = k + 1 + n;
            let block = Matrix::from_fn(size, size, |r, c| match (r <= k, c <= k) {
                (true, true) => 0.0,
                (true, false) => b[(c - k - 1, r)],
                (false, true) => a[(r - k - 1, c)],
                (false, false) => core[(r - k - 1, c - k - 1)],
            });
            total += sign * det(&block);
        }
    }
    total
}

/// Two-orbital matrix of a determinant from its column Gram data, with the coherence
/// computed by [`CoherencePath::select`].
pub fn rdm2_slater(u: &PartialIsometry, i: usize, j: usize) -> Result<OrbitalRdm2> {
    rdm2_slater_with(u, i, j, CoherencePath::select(u, i, j))
}

pub fn rdm2_slater_with(u: &PartialIsometry, i: usize, j: usize, path: CoherencePath) -> Result<OrbitalRdm2> {
    let off = slater_coherence(u, i, j, path)?;
    let (ui, uj) = (u.column(i), u.column(j));
    let (a, b) = (ui.norm_squared(), uj.norm_squared());
    let g = a * b - ui.dot(&uj).powi(2);
    let mut rho = Matrix::zeros(4, 4);
    rho[(0, 0)] = 1.0 - a - b + g;
    rho[(1, 1)] = b - g;
    rho[(2, 2)] = a - g;
    rho[(3, 3)] = g;
    rho[(1, 2)] = off;
    rho[(2, 1)] = off;
    Ok(OrbitalRdm2 { sites: (i, j), matrix: rho })
}

/// `-tr rho log2 rho`, eigenvalues clamped to `[0, 1]`.
pub fn von_neumann_entropy(rho: &Matrix) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::Dimension("density matrix must be square".into()));
    }
    let asym = (rho - rho.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Validation(format!("density matrix asymmetric by {asym:.2e}")));
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::Validation(format!("density matrix trace {tr}")));
    }
    let (eig, _) = symmetric_eigen(rho);
    Ok(eig
        .into_iter()
        .map(|x| x.clamp(0.0, 1.0))
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum())
}

/// Symmetric, zero-diagonal, non-negative orbital mutual information.
#[derive(Clone, Debug, PartialEq)]
pub struct MutualInfoGraph {
    matrix: Matrix,
}

impl MutualInfoGraph {
    pub fn new(mut matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("mutual information must be square".into()));
        }
        let l = matrix.nrows();
        for a in 0..l {
            if matrix[(a, a)] != 0.0 {
                return Err(Error::Validation(format!("nonzero diagonal at {a}")));
            }
            for b in 0..l {
                let x = matrix[(a, b)];
                if (x - matrix[(b, a)]).abs() > SYMMETRY_TOL {
                    return Err(Error::Validation(format!("asymmetric at ({a}, {b})")));
                }
                if x < -MI_CLAMP || !x.is_finite() {
                    return Err(Error::Validation(format!("entry ({a}, {b}) = {x} is negative")));
                }
                if x < 0.0 {
                    matrix[(a, b)] = 0.0;
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.matrix * factor)
    }

    /// Weighted graph Laplacian: degree on the diagonal, `-IM` off it.
    pub fn laplacian(&self) -> Matrix {
        let l = self.modes();
        let mut lap = -self.matrix.clone();
        for a in 0..l {
            lap[(a, a)] = self.matrix.row(a).sum();
        }
        lap
    }
}

fn assemble(l: usize, s1: &[f64], s2: impl Fn(usize, usize) -> Result<f64>) -> Result<MutualInfoGraph> {
    let mut m = Matrix::zeros(l, l);
    for i in 0..l {
        for j in i + 1..l {
            let v = s1[i] + s1[j] - s2(i, j)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    MutualInfoGraph::new(m)
}

/// Mutual information from brute-force partial traces of an arbitrary tensor.
pub fn mutual_information(t: &OccupationTensor) -> Result<MutualInfoGraph> {
    let l = t.modes();
    let s1 = (0..l)
        .map(|i| von_neumann_entropy(&rdm1_brute(t, i)?.matrix))
        .collect::<Result<Vec<_>>>()?;
    assemble(l, &s1, |i, j| von_neumann_entropy(&rdm2_brute(t, i, j)?.matrix))
}

/// Mutual information of a determinant from the closed-form density matrices.
pub fn mutual_information_slater(u: &PartialIsometry) -> Result<MutualInfoGraph> {
    let l = u.modes();
    let s1 = (0..l)
        .map(|i| von_neumann_entropy(&rdm1_slater(u, i)?.matrix))
        .collect::<Result<Vec<_>>>()?;
    assemble(l, &s1, |i, j| von_neumann_entropy(&rdm2_slater(u, i, j)?.matrix))
}
