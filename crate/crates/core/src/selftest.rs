//! Randomized oracle suites comparing closed forms against direct evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::experiments::random_partial_isometry;
use crate::linalg::{multiset_distance, Matrix};
use crate::rdm::{rdm2_brute, rdm2_slater_with, slater_coherence, CoherencePath};
use crate::spectra::{cut_spectrum_dense, modified_cauchy_binet, slater_cut_spectrum_block};
use crate::tensor::slater_coefficients;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Restricted Cauchy-Binet identity on random `m x n` / `n x m` pairs (`m, n <= max_dim`)
/// with every admissible size of the fixed index set `T`.
pub fn cauchy_binet_suite(instances: usize, max_dim: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let m = rng.random_range(1..=max_dim);
        let n = rng.random_range(m..=max_dim.max(m));
        let a = gaussian(m, n, &mut rng);
        let b = gaussian(n, m, &mut rng);
        let mut labels: Vec<usize> = (0..n).collect();
        for j in 0..=m {
            use rand::seq::SliceRandom;
            labels.shuffle(&mut rng);
            let (t, rest) = labels.split_at(j);
            let (lhs, rhs) = modified_cauchy_binet(&a, &b, t, rest)?;
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
            cases += 1;
        }
    }
    Ok(SuiteReport { name: "cauchy_binet".into(), cases, max_error: worst, tolerance: 1e-10 })
}

/// Compound-matrix block spectra against dense SVD on every cut.
pub fn block_formula_suite(instances: usize, max_particles: usize, max_modes: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..instances {
        let n = rng.random_range(1..=max_particles);
        let l = rng.random_range((n + 1).max(2)..=max_modes.max(n + 1));
        let u = random_partial_isometry(n, l, rng.random())?;
        let t = slater_coefficients(&u)?;
        let k = rng.random_range(1..l);
        let dense = cut_spectrum_dense(&t, k)?;
        let block = slater_cut_spectrum_block(&u, k)?;
        worst = worst.max(multiset_distance(&dense.values, &block.values));
        cases += 1;
    }
    Ok(SuiteReport { name: "block_formula".into(), cases, max_error: worst, tolerance: 1e-9 })
}

/// Closed-form two-orbital matrices against partial traces, and every applicable
/// coherence shortcut against the general sum.
pub fn rdm_suite(instances: usize, max_particles: usize, max_modes: usize, seed: u64) -> Result<(SuiteReport, SuiteReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut worst_path) = (0.0f64, 0.0f64);
    let mut path_cases = 0;
    for _ in 0..instances {
        let n = rng.random_range(1..=max_particles);
        let l = rng.random_range((n + 1).max(3)..=max_modes.max(n + 1).max(3));
        let u = random_partial_isometry(n, l, rng.random())?;
        let t = slater_coefficients(&u)?;
        let i = rng.random_range(0..l - 1);
        let j = rng.random_range(i + 1..l);
        let brute = rdm2_brute(&t, i, j)?;
        let general = rdm2_slater_with(&u, i, j, CoherencePath::General)?;
        worst = worst.max((&brute.matrix - &general.matrix).amax());
        let reference = general.matrix[(1, 2)];
        for path in [CoherencePath::Adjacent, CoherencePath::NextNearest, CoherencePath::TwoParticles] {
            if let Ok(v) = slater_coherence(&u, i, j, path) {
                worst_path = worst_path.max((v - reference).abs());
                path_cases += 1;
            }
        }
    }
    Ok((
        SuiteReport { name: "rdm_closed_form".into(), cases: instances, max_error: worst, tolerance: 1e-10 },
        SuiteReport { name: "rdm_special_paths".into(), cases: path_cases, max_error: worst_path, tolerance: 1e-12 },
    ))
}

/// Every suite at its default size.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    let (rdm, paths) = rdm_suite(200, 5, 10, seed.wrapping_add(2))?;
    Ok(vec![
        cauchy_binet_suite(1000, 6, seed)?,
        block_formula_suite(200, 5, 12, seed.wrapping_add(1))?,
        rdm,
        paths,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(cauchy_binet_suite(50, 5, 1).unwrap().passed());
        assert!(block_formula_suite(20, 3, 8, 1).unwrap().passed());
        let (a, b) = rdm_suite(20, 3, 7, 1).unwrap();
        assert!(a.passed() && b.passed());
        assert!(b.cases > 0);
    }
}
