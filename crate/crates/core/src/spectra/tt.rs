//! Left-to-right successive-SVD tensor-train decomposition.

use crate::error::Result;
use crate::linalg::{thin_svd, Matrix};
use crate::spectra::RANK_TOL;
use crate::tensor::OccupationTensor;

/// One site tensor of shape `left x 2 x right`, stored as `data[(a * 2 + mu) * right + b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TtCore {
    pub left: usize,
    pub right: usize,
    pub data: Vec<f64>,
}

impl TtCore {
    pub fn get(&self, a: usize, mu: usize, b: usize) -> f64 {
        self.data[(a * 2 + mu) * self.right + b]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtDecomposition {
    pub cores: Vec<TtCore>,
    /// Bond dimensions `r_1 .. r_(L-1)`.
    pub ranks: Vec<usize>,
    pub threshold: f64,
    /// Sum of the squares of every discarded singular value.
    pub discarded_weight: f64,
}

impl TtDecomposition {
    pub fn bond_dimension(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(1)
    }

    /// Full coefficient vector, first site most significant.
    pub fn contract(&self) -> Vec<f64> {
        // Running block: rows = configurations of the sites seen so far, cols = bond.
        let mut acc = vec![1.0];
        let mut bond = 1;
        for core in &self.cores {
            let rows = acc.len() / bond;
            let mut next = vec![0.0; rows * 2 * core.right];
            for r in 0..rows {
                for mu in 0..2 {
                    let out = (r * 2 + mu) * core.right;
                    for a in 0..bond {
                        let x = acc[r * bond + a];
                        if x == 0.0 {
                            continue;
                        }
                        for b in 0..core.right {
                            next[out + b] += x * core.get(a, mu, b);
                        }
                    }
                }
            }
            acc = next;
            bond = core.right;
        }
        acc
    }

    /// Euclidean distance between the contraction and `t`.
    pub fn reconstruction_error(&self, t: &OccupationTensor) -> f64 {
        self.contract()
            .iter()
            .zip(t.coefficients())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Successive SVDs of the left-to-right unfoldings. At every cut, singular values at or
/// below `max(eps * |T|, 1e-12 * sigma_1)` are discarded.
pub fn tt_decompose(t: &OccupationTensor, eps: f64) -> Result<TtDecomposition> {
    let l = t.modes();
    let norm = t.norm();
    let mut cores = Vec::with_capacity(l);
    let mut ranks = Vec::with_capacity(l.saturating_sub(1));
    let mut discarded = 0.0;

    let mut rest = Matrix::from_row_slice(2, 1 << (l - 1), t.coefficients());
    let mut r_prev = 1;
    for k in 1..l {
        let (u, sv, vt) = thin_svd(&rest);
        let cutoff = (eps * norm).max(RANK_TOL * sv[0]);
        let keep = sv.iter().filter(|&&s| s > cutoff).count().max(1);
        discarded += sv[keep..].iter().map(|s| s * s).sum::<f64>();

        let mut data = vec![0.0; r_prev * 2 * keep];
        for row in 0..r_prev * 2 {
            for b in 0..keep {
                data[row * keep + b] = u[(row, b)];
            }
        }
        cores.push(TtCore { left: r_prev, right: keep, data });
        ranks.push(keep);

        // sigma V^T, re-folded so the next site joins the row index.
        let cols = 1usize << (l - k);
        let half = cols / 2;
        rest = Matrix::from_fn(keep * 2, half, |row, col| {
            let (b, mu) = (row / 2, row % 2);
            sv[b] * vt[(b, mu * half + col)]
        });
        r_prev = keep;
    }
    let data = (0..r_prev * 2).map(|row| rest[(row, 0)]).collect();
    cores.push(TtCore { left: r_prev, right: 1, data });

    Ok(TtDecomposition { cores, ranks, threshold: eps, discarded_weight: discarded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rank, singular_values};
    use crate::tensor::{reshape, slater_coefficients, PartialIsometry};

    #[test]
    fn product_state_has_unit_ranks() {
        let t = OccupationTensor::basis_state(6, &[2]).unwrap();
        let tt = tt_decompose(&t, 0.0).unwrap();
        assert_eq!(tt.ranks, vec![1; 5]);
        assert!(tt.reconstruction_error(&t) < 1e-15);
    }

    #[test]
    fn exact_ranks_match_unfoldings() {
        let u = crate::experiments::random_partial_isometry(3, 8, 2).unwrap();
        let t = slater_coefficients(&u).unwrap();
        let tt = tt_decompose(&t, 0.0).unwrap();
        for k in 1..8 {
            assert_eq!(tt.ranks[k - 1], rank(&reshape(&t, k).unwrap(), 1e-12), "cut {k}");
        }
        assert!(tt.bond_dimension() <= 8);
        assert!(tt.reconstruction_error(&t) < 1e-12);
    }

    #[test]
    fn truncation_error_is_bounded() {
        let u = crate::experiments::random_partial_isometry(3, 8, 9).unwrap();
        let t = slater_coefficients(&u).unwrap();
        let tt = tt_decompose(&t, 1e-2).unwrap();
        let err = tt.reconstruction_error(&t);
        assert!(err <= tt.discarded_weight.sqrt() + 1e-10);
        assert!(tt.discarded_weight > 0.0);
    }

    #[test]
    fn half_filled_spread_orbitals_saturate_the_bound() {
        // psi_k = (phi_k + phi_(k+N)) / sqrt 2.
        let n = 3;
        let h = 0.5f64.sqrt();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|k| (0..2 * n).map(|j| if j == k || j == k + n { h } else { 0.0 }).collect())
            .collect();
        let u = PartialIsometry::from_rows(&rows).unwrap();
        let t = slater_coefficients(&u).unwrap();
        let tt = tt_decompose(&t, 0.0).unwrap();
        assert_eq!(tt.ranks[n - 1], 1 << n);
        let sv = singular_values(&reshape(&t, n).unwrap());
        assert!(sv.iter().all(|&s| (s - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-14));
    }
}
