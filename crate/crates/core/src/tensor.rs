//! Occupation-representation tensors of Slater determinants and their superpositions.
//!
//! Conventions used throughout the crate:
//! - site `p` is bit `L - 1 - p` of the linear index, so the first site is the most
//!   significant bit;
//! - an [`Ordering`] maps a new position to the old label it holds;
//! - relabelling sites of a fermionic state multiplies each coefficient by the parity of
//!   the reordering of its occupied sites, which is what rebuilding the determinant from
//!   permuted orbital columns produces.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{mask_of, masks_with_weight, site_bit, sites_of, sort_sign, subsets};
use crate::error::{Error, Result};
use crate::linalg::{det, select_columns, select_rows, Matrix};

/// Default hard cap on the number of modes of a dense tensor (it holds `2^L` entries).
pub const DEFAULT_MAX_MODES: usize = 20;
/// Frobenius tolerance on `U U^T - Id`.
pub const ISOMETRY_TOL: f64 = 1e-12;
/// Tolerance on the Euclidean norm of a constructed tensor.
pub const NORM_TOL: f64 = 1e-12;
/// Magnitude below which an off-sector coefficient counts as zero.
pub const SECTOR_TOL: f64 = 1e-14;

/// `N x L` coefficient matrix of `N` orthonormal orbitals over `L` basis functions.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialIsometry {
    entries: Matrix,
}

impl PartialIsometry {
    pub fn new(entries: Matrix) -> Result<Self> {
        Self::with_cap(entries, DEFAULT_MAX_MODES)
    }

    pub fn with_cap(entries: Matrix, max_modes: usize) -> Result<Self> {
        let (n, l) = entries.shape();
        if l > max_modes {
            return Err(Error::Capacity { modes: l, cap: max_modes });
        }
        if n == 0 || n > l {
            return Err(Error::Validation(format!(
                "need 1 <= N <= L, got N = {n}, L = {l}"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite entry".into()));
        }
        let residual = (&entries * entries.transpose() - Matrix::identity(n, n)).norm();
        if residual > ISOMETRY_TOL {
            return Err(Error::Validation(format!(
                "rows are not orthonormal: |U U^T - Id|_F = {residual:.3e}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != l) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(Matrix::from_fn(n, l, |r, c| rows[r][c]))
    }

    /// Number of orbitals `N`.
    pub fn particles(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of basis functions `L`.
    pub fn modes(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn column(&self, j: usize) -> nalgebra::DVector<f64> {
        self.entries.column(j).into_owned()
    }

    pub fn columns(&self, cols: &[usize]) -> Matrix {
        select_columns(&self.entries, cols)
    }

    /// `(V_k, W_k)`: the first `k` columns and the remaining `L - k`.
    pub fn split(&self, k: usize) -> (Matrix, Matrix) {
        let l = self.modes();
        let left: Vec<usize> = (0..k).collect();
        let right: Vec<usize> = (k..l).collect();
        (self.columns(&left), self.columns(&right))
    }

    /// Column `p` of the result is column `ordering[p]` of `self`.
    pub fn permute_columns(&self, ordering: &Ordering) -> Result<Self> {
        if ordering.len() != self.modes() {
            return Err(Error::Dimension(format!(
                "ordering of length {} for {} modes",
                ordering.len(),
                self.modes()
            )));
        }
        Ok(Self {
            entries: self.columns(ordering.as_slice()),
        })
    }

    /// Isometry formed by a subset of the orbitals (rows).
    pub fn select_orbitals(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.particles()) {
            return Err(Error::Index(format!(
                "orbital {bad} out of range for {} orbitals",
                self.particles()
            )));
        }
        Self::new(select_rows(&self.entries, rows))
    }
}

/// Dense `2^L` coefficient array in the occupation representation.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationTensor {
    coeffs: Vec<f64>,
    modes: usize,
    particles: Option<usize>,
}

impl OccupationTensor {
    /// Wraps a normalized coefficient vector, inferring a definite particle number when
    /// every coefficient outside one popcount sector vanishes.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        let len = coeffs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "coefficient count {len} is not a power of two >= 2"
            )));
        }
        let modes = len.trailing_zeros() as usize;
        if modes > DEFAULT_MAX_MODES {
            return Err(Error::Capacity { modes, cap: DEFAULT_MAX_MODES });
        }
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("tensor norm {norm} is not 1")));
        }
        let particles = infer_particles(&coeffs);
        Ok(Self { coeffs, modes, particles })
    }

    /// Product state with the listed sites occupied.
    pub fn basis_state(modes: usize, occupied: &[usize]) -> Result<Self> {
        if let Some(&bad) = occupied.iter().find(|&&s| s >= modes) {
            return Err(Error::Index(format!("site {bad} out of range")));
        }
        let mut coeffs = vec![0.0; 1 << modes];
        coeffs[mask_of(modes, occupied)] = 1.0;
        Self::from_coefficients(coeffs)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Definite particle number, if the tensor lives in a single sector.
    pub fn particles(&self) -> Option<usize> {
        self.particles
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Coefficient at the configuration with exactly `sites` occupied.
    pub fn amplitude(&self, sites: &[usize]) -> f64 {
        self.coeffs[mask_of(self.modes, sites)]
    }
}

fn infer_particles(coeffs: &[f64]) -> Option<usize> {
    let (lead, _) = coeffs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
    let n = lead.count_ones();
    coeffs
        .iter()
        .enumerate()
        .all(|(i, c)| i.count_ones() == n || c.abs() <= SECTOR_TOL)
        .then_some(n as usize)
}

/// One determinant of a superposition: amplitude and the orbitals it occupies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amplitude: f64,
    pub orbitals: Vec<usize>,
}

/// Normalized superposition of determinants built from a shared orthonormal orbital family.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedState {
    orbitals: PartialIsometry,
    terms: Vec<Term>,
    particles: usize,
}

impl CorrelatedState {
    pub fn new(orbitals: PartialIsometry, terms: Vec<Term>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Validation("a superposition needs at least one term".into()))?;
        let particles = first.orbitals.len();
        if particles == 0 {
            return Err(Error::Validation("empty orbital set".into()));
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if t.orbitals.len() != particles {
                return Err(Error::Validation(format!(
                    "term {:?} has {} orbitals, expected {particles}",
                    t.orbitals,
                    t.orbitals.len()
                )));
            }
            if !t.orbitals.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Validation(format!(
                    "term {:?} is not strictly increasing",
                    t.orbitals
                )));
            }
            if let Some(&bad) = t.orbitals.iter().find(|&&i| i >= orbitals.particles()) {
                return Err(Error::Index(format!(
                    "orbital {bad} out of range for {} orbitals",
                    orbitals.particles()
                )));
            }
            if !t.amplitude.is_finite() {
                return Err(Error::Validation("non-finite amplitude".into()));
            }
            if !seen.insert(t.orbitals.clone()) {
                return Err(Error::Validation(format!("duplicate term {:?}", t.orbitals)));
            }
        }
        let weight: f64 = terms.iter().map(|t| t.amplitude * t.amplitude).sum();
        if (weight - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "squared amplitudes sum to {weight}, not 1"
            )));
        }
        Ok(Self { orbitals, terms, particles })
    }

    /// A single determinant with amplitude 1.
    pub fn single(orbitals: PartialIsometry) -> Self {
        let n = orbitals.particles();
        Self {
            orbitals,
            terms: vec![Term { amplitude: 1.0, orbitals: (0..n).collect() }],
            particles: n,
        }
    }

    pub fn orbitals(&self) -> &PartialIsometry {
        &self.orbitals
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.orbitals.modes()
    }

    /// Partial isometry of term `i`'s determinant.
    pub fn term_isometry(&self, i: usize) -> Result<PartialIsometry> {
        self.orbitals.select_orbitals(&self.terms[i].orbitals)
    }

    /// Index of the term with the largest `|amplitude|` (first on ties).
    pub fn dominant_term(&self) -> usize {
        let mut best = 0;
        for (i, t) in self.terms.iter().enumerate() {
            if t.amplitude.abs() > self.terms[best].amplitude.abs() {
                best = i;
            }
        }
        best
    }

    /// Same state with the basis columns relabelled.
    pub fn reorder(&self, ordering: &Ordering) -> Result<Self> {
        Ok(Self {
            orbitals: self.orbitals.permute_columns(ordering)?,
            terms: self.terms.clone(),
            particles: self.particles,
        })
    }
}

/// Permutation of the basis: `perm[new_position] = old_label`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let l = perm.len();
        let mut hit = vec![false; l];
        for &p in &perm {
            if p >= l || hit[p] {
                return Err(Error::Validation(format!("{perm:?} is not a permutation")));
            }
            hit[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(modes: usize) -> Self {
        Self { perm: (0..modes).collect() }
    }

    /// Ordering placing `left` first, then the remaining labels, both ascending.
    pub fn from_bipartition(modes: usize, left: &[usize]) -> Result<Self> {
        let mut l = left.to_vec();
        l.sort_unstable();
        let rest = (0..modes).filter(|i| !l.contains(i));
        let perm: Vec<usize> = l.iter().copied().chain(rest).collect();
        Self::new(perm)
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Applying `self` and then `next` (positions of `next` refer to `self`'s output).
    pub fn then(&self, next: &Ordering) -> Result<Ordering> {
        if next.len() != self.len() {
            return Err(Error::Dimension("orderings of different length".into()));
        }
        Ok(Ordering {
            perm: next.perm.iter().map(|&q| self.perm[q]).collect(),
        })
    }

    pub fn inverse(&self) -> Ordering {
        let mut inv = vec![0; self.len()];
        for (p, &q) in self.perm.iter().enumerate() {
            inv[q] = p;
        }
        Ordering { perm: inv }
    }
}

impl TryFrom<Vec<usize>> for Ordering {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Ordering::new(v)
    }
}

impl From<Ordering> for Vec<usize> {
    fn from(o: Ordering) -> Self {
        o.perm
    }
}

/// Occupation tensor of the determinant of the rows of `u`: the coefficient of an
/// `N`-subset of sites is the minor of `u` on those columns.
pub fn slater_coefficients(u: &PartialIsometry) -> Result<OccupationTensor> {
    slater_coefficients_capped(u, DEFAULT_MAX_MODES)
}

pub fn slater_coefficients_capped(u: &PartialIsometry, max_modes: usize) -> Result<OccupationTensor> {
    let (n, l) = (u.particles(), u.modes());
    if l > max_modes {
        return Err(Error::Capacity { modes: l, cap: max_modes });
    }
    let mut coeffs = vec![0.0; 1 << l];
    let mut cols = Vec::with_capacity(n);
    for mask in masks_with_weight(l, n) {
        cols.clear();
        cols.extend((0..l).filter(|&s| mask & site_bit(l, s) != 0));
        coeffs[mask] = det(&u.columns(&cols));
    }
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Consistency(format!("determinant tensor has norm {norm}")));
    }
    Ok(OccupationTensor { coeffs, modes: l, particles: Some(n) })
}

/// Norm deviation above which a superposition is rejected.
pub const SUPERPOSITION_NORM_TOL: f64 = 1e-8;

/// Occupation tensor of `sum_I alpha_I |psi_I>`.
pub fn correlated_tensor(state: &CorrelatedState) -> Result<OccupationTensor> {
    let l = state.modes();
    if l > DEFAULT_MAX_MODES {
        return Err(Error::Capacity { modes: l, cap: DEFAULT_MAX_MODES });
    }
    let mut coeffs = vec![0.0; 1 << l];
    for (i, term) in state.terms().iter().enumerate() {
        let part = slater_coefficients(&state.term_isometry(i)?)?;
        for (c, p) in coeffs.iter_mut().zip(part.coefficients()) {
            *c += term.amplitude * p;
        }
    }
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > SUPERPOSITION_NORM_TOL {
        return Err(Error::Consistency(format!(
            "superposition has norm {norm}; orbital rows are not orthonormal"
        )));
    }
    Ok(OccupationTensor {
        coeffs,
        modes: l,
        particles: Some(state.particles()),
    })
}

/// Relabels the sites of `t`: new site `p` carries old site `ordering[p]`, with the
/// fermionic reordering sign of each configuration.
pub fn apply_ordering(t: &OccupationTensor, ordering: &Ordering) -> Result<OccupationTensor> {
    let l = t.modes();
    if ordering.len() != l {
        return Err(Error::Dimension(format!(
            "ordering of length {} for a {l}-mode tensor",
            ordering.len()
        )));
    }
    let perm = ordering.as_slice();
    let mut out = vec![0.0; t.coeffs.len()];
    let mut labels = Vec::with_capacity(l);
    for (new_mask, slot) in out.iter_mut().enumerate() {
        labels.clear();
        let mut old_mask = 0usize;
        for (p, &old) in perm.iter().enumerate() {
            if new_mask & site_bit(l, p) != 0 {
                old_mask |= site_bit(l, old);
                labels.push(old);
            }
        }
        let c = t.coeffs[old_mask];
        if c != 0.0 {
            *slot = sort_sign(&labels) * c;
        }
    }
    Ok(OccupationTensor {
        coeffs: out,
        modes: l,
        particles: t.particles,
    })
}

fn check_cut(modes: usize, k: usize) -> Result<()> {
    if k == 0 || k >= modes {
        return Err(Error::Index(format!(
            "cut {k} outside 1..={} for {modes} modes",
            modes.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `2^k x 2^(L-k)` matricization; rows encode the first `k` sites (first site most
/// significant), columns the rest.
pub fn reshape(t: &OccupationTensor, k: usize) -> Result<Matrix> {
    let l = t.modes();
    check_cut(l, k)?;
    let cols = 1usize << (l - k);
    Ok(Matrix::from_fn(1 << k, cols, |r, c| t.coeffs[r * cols + c]))
}

/// Particle-number blocks `C_0 .. C_min(k,N)` of the cut-`k` matricization. Block `j` has
/// rows indexed by the `j`-subsets of the left sites and columns by the `(N-j)`-subsets of
/// the right sites, both lexicographic.
pub fn sector_blocks(t: &OccupationTensor, k: usize) -> Result<Vec<Matrix>> {
    let l = t.modes();
    check_cut(l, k)?;
    let n = t.particles().ok_or_else(|| {
        Error::Consistency("tensor has no definite particle number".into())
    })?;
    let left: Vec<usize> = (0..k).collect();
    let right: Vec<usize> = (k..l).collect();
    let mut blocks = Vec::with_capacity(k.min(n) + 1);
    for j in 0..=k.min(n) {
        let rows: Vec<usize> = subsets(&left, j).iter().map(|s| mask_of(l, s)).collect();
        let cols: Vec<usize> = if n - j <= right.len() {
            subsets(&right, n - j).iter().map(|s| mask_of(l, s)).collect()
        } else {
            Vec::new()
        };
        blocks.push(Matrix::from_fn(rows.len(), cols.len(), |r, c| {
            t.coeffs[rows[r] | cols[c]]
        }));
    }
    Ok(blocks)
}

/// Occupied sites of a configuration index.
pub fn occupied_sites(t: &OccupationTensor, mask: usize) -> Vec<usize> {
    sites_of(t.modes(), mask)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::singular_values;

    /// Minimal-basis H2 determinant over (A up, A down, B up, B down).
    pub fn h2(c: f64, s: f64, cp: f64, sp: f64) -> PartialIsometry {
        PartialIsometry::from_rows(&[vec![c, 0.0, s, 0.0], vec![0.0, cp, 0.0, sp]]).unwrap()
    }

    pub fn angles(theta: f64, phi: f64) -> (f64, f64, f64, f64) {
        (theta.cos(), theta.sin(), phi.cos(), phi.sin())
    }

    #[test]
    fn single_orbital_two_sites() {
        let h = 0.5f64.sqrt();
        let u = PartialIsometry::from_rows(&[vec![h, h]]).unwrap();
        let t = slater_coefficients(&u).unwrap();
        assert_eq!(t.coefficients(), &[0.0, h, h, 0.0]);
        assert_eq!(t.particles(), Some(1));
        let m = reshape(&t, 1).unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[0.0, h, h, 0.0]));
    }

    #[test]
    fn identity_rows_give_single_configuration() {
        let u = PartialIsometry::from_rows(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])
            .unwrap();
        let t = slater_coefficients(&u).unwrap();
        for (i, &c) in t.coefficients().iter().enumerate() {
            assert_eq!(c, if i == 0b1100 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn h2_occupation_representation() {
        let (c, s, cp, sp) = angles(0.3, 1.1);
        let t = slater_coefficients(&h2(c, s, cp, sp)).unwrap();
        let expect = [(0b1100, c * cp), (0b1001, c * sp), (0b0110, -s * cp), (0b0011, s * sp)];
        for (mask, v) in expect {
            assert!((t.get(mask) - v).abs() < 1e-15, "mask {mask:04b}");
        }
        let others: f64 = t
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(i, _)| !expect.iter().any(|(m, _)| m == i))
            .map(|(_, c)| c.abs())
            .sum();
        assert_eq!(others, 0.0);
        // The printed canonical table: anti-diagonal ss', -sc', cs', cc'.
        let m = reshape(&t, 2).unwrap();
        assert!((m[(0, 3)] - s * sp).abs() < 1e-15);
        assert!((m[(1, 2)] + s * cp).abs() < 1e-15);
        assert!((m[(2, 1)] - c * sp).abs() < 1e-15);
        assert!((m[(3, 0)] - c * cp).abs() < 1e-15);
    }

    #[test]
    fn h2_fiedler_relabelling_is_rank_one() {
        let (c, s, cp, sp) = angles(0.4, 0.9);
        let t = slater_coefficients(&h2(c, s, cp, sp)).unwrap();
        let order = Ordering::new(vec![0, 2, 1, 3]).unwrap();
        let r = apply_ordering(&t, &order).unwrap();
        let sv = singular_values(&reshape(&r, 2).unwrap());
        assert!((sv[0] - 1.0).abs() < 1e-14);
        assert!(sv[1..].iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn identity_ordering_is_noop() {
        let (c, s, cp, sp) = angles(0.2, 0.7);
        let t = slater_coefficients(&h2(c, s, cp, sp)).unwrap();
        assert_eq!(apply_ordering(&t, &Ordering::identity(4)).unwrap(), t);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            PartialIsometry::from_rows(&[vec![1.0, 1.0]]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            PartialIsometry::new(Matrix::zeros(1, 21)),
            Err(Error::Capacity { .. })
        ));
        assert!(Ordering::new(vec![0, 0, 1]).is_err());
        let t = OccupationTensor::basis_state(3, &[1]).unwrap();
        assert!(reshape(&t, 0).is_err());
        assert!(reshape(&t, 3).is_err());
        assert!(apply_ordering(&t, &Ordering::identity(4)).is_err());
    }

    #[test]
    fn mixed_sector_tensor_has_no_blocks() {
        let h = 0.5f64.sqrt();
        // |10> + |11>: popcounts 1 and 2.
        let t = OccupationTensor::from_coefficients(vec![0.0, 0.0, h, h]).unwrap();
        assert_eq!(t.particles(), None);
        assert!(matches!(sector_blocks(&t, 1), Err(Error::Consistency(_))));
    }

    #[test]
    fn h2_blocks_follow_lexicographic_indexing() {
        let (c, s, cp, sp) = angles(0.3, 1.1);
        let t = slater_coefficients(&h2(c, s, cp, sp)).unwrap();
        let b = sector_blocks(&t, 2).unwrap();
        assert_eq!(b.len(), 3);
        // C_0: nothing on the left, both right sites occupied.
        assert_eq!(b[0].shape(), (1, 1));
        assert!((b[0][(0, 0)] - s * sp).abs() < 1e-15);
        // C_1 rows {A up}, {A down}; columns {B up}, {B down}.
        assert_eq!(b[1].shape(), (2, 2));
        assert!(b[1][(0, 0)].abs() < 1e-15);
        assert!((b[1][(0, 1)] - c * sp).abs() < 1e-15);
        assert!((b[1][(1, 0)] + s * cp).abs() < 1e-15);
        assert!(b[1][(1, 1)].abs() < 1e-15);
        assert!((b[2][(0, 0)] - c * cp).abs() < 1e-15);
    }

    #[test]
    fn disjoint_superposition_splits_weight() {
        let u = PartialIsometry::new(Matrix::identity(4, 4)).unwrap();
        let h = 0.5f64.sqrt();
        let state = CorrelatedState::new(
            u,
            vec![
                Term { amplitude: h, orbitals: vec![0, 1] },
                Term { amplitude: h, orbitals: vec![2, 3] },
            ],
        )
        .unwrap();
        let t = correlated_tensor(&state).unwrap();
        assert!((t.get(0b1100).powi(2) - 0.5).abs() < 1e-15);
        assert!((t.get(0b0011).powi(2) - 0.5).abs() < 1e-15);
        assert!((t.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn correlated_state_validation() {
        let u = PartialIsometry::new(Matrix::identity(4, 4)).unwrap();
        let dup = vec![
            Term { amplitude: 0.6, orbitals: vec![0, 1] },
            Term { amplitude: 0.8, orbitals: vec![0, 1] },
        ];
        assert!(CorrelatedState::new(u.clone(), dup).is_err());
        let unnormalized = vec![Term { amplitude: 0.9, orbitals: vec![0, 1] }];
        assert!(CorrelatedState::new(u.clone(), unnormalized).is_err());
        let out_of_range = vec![Term { amplitude: 1.0, orbitals: vec![0, 7] }];
        assert!(CorrelatedState::new(u, out_of_range).is_err());
    }

    #[test]
    fn ordering_algebra() {
        let a = Ordering::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(a.then(&a.inverse()).unwrap(), Ordering::identity(4));
        let id = Ordering::identity(4);
        assert_eq!(id.then(&id).unwrap(), id);
        let b = Ordering::from_bipartition(5, &[3, 1]).unwrap();
        assert_eq!(b.as_slice(), &[1, 3, 0, 2, 4]);
    }
}
