//! Orbital ordering schemes: canonical, Fiedler, best prefactor (exhaustive and
//! annealed) and best weighted prefactor.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::rdm::{mutual_information, MutualInfoGraph};
use crate::spectra::split_prefactor;
use crate::tensor::{slater_coefficients, CorrelatedState, Ordering, PartialIsometry};

/// Largest number of subsets the exhaustive searches enumerate by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 1_000_000;
/// Laplacian eigenvalues at or below this fraction of the largest one count as zero.
pub const FIEDLER_ZERO_TOL: f64 = 1e-10;
/// Fiedler entries closer than this fraction of the largest magnitude are ties.
pub const FIEDLER_TIE_TOL: f64 = 1e-9;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Canonical,
    Fiedler,
    PrefactorExact,
    PrefactorAnneal,
    WeightedPrefactor,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Canonical,
        Method::Fiedler,
        Method::PrefactorExact,
        Method::PrefactorAnneal,
        Method::WeightedPrefactor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Canonical => "canonical",
            Method::Fiedler => "fiedler",
            Method::PrefactorExact => "prefactor_exact",
            Method::PrefactorAnneal => "prefactor_anneal",
            Method::WeightedPrefactor => "weighted_prefactor",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub method: Method,
    pub permutation: Ordering,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl OrderingResult {
    fn subset(method: Method, modes: usize, subset: Vec<usize>, objective: f64) -> Result<Self> {
        Ok(Self {
            method,
            permutation: Ordering::from_bipartition(modes, &subset)?,
            objective: Some(objective),
            bipartition: Some(subset),
            seed: None,
            warnings: Vec::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStart {
    /// First labels of the Fiedler order.
    Fiedler,
    /// Uniformly random subset drawn from the chain's RNG.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    /// Iteration count; `None` means `ceil(binom(L, size) / 2)`.
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_warm")]
    pub warm_start: WarmStart,
}

fn default_t0() -> f64 {
    1.0
}

fn default_decay() -> f64 {
    0.99
}

fn default_warm() -> WarmStart {
    WarmStart::Fiedler
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            t0: default_t0(),
            decay: default_decay(),
            max_iter: None,
            seed: 0,
            warm_start: default_warm(),
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Validation(format!("initial temperature {} must be positive", self.t0)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::Validation(format!("decay {} must lie in (0, 1)", self.decay)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::Validation("iteration cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn iterations(&self, modes: usize, size: usize) -> usize {
        self.max_iter
            .unwrap_or_else(|| binomial(modes, size).div_ceil(2).max(1).min(usize::MAX as u128) as usize)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Identity on the given basis.
pub fn canonical_order(modes: usize) -> OrderingResult {
    OrderingResult {
        method: Method::Canonical,
        permutation: Ordering::identity(modes),
        objective: None,
        bipartition: None,
        seed: None,
        warnings: Vec::new(),
    }
}

/// Eigenvector of the second-smallest Laplacian eigenvalue, sign-fixed so the first
/// entry of largest magnitude is negative, plus any warnings. `None` for a graph
/// without edges.
pub fn fiedler_vector(im: &MutualInfoGraph) -> (Option<Vec<f64>>, Vec<String>) {
    let l = im.modes();
    let mut warnings = Vec::new();
    if l < 2 {
        return (None, warnings);
    }
    if im.matrix().amax() == 0.0 {
        warnings.push("degenerate Fiedler vector: mutual information is identically zero".into());
        return (None, warnings);
    }
    let (eig, vecs) = symmetric_eigen(&im.laplacian());
    let tol = FIEDLER_ZERO_TOL * eig[l - 1];
    let zeros = eig.iter().filter(|&&e| e <= tol).count();
    let mut v: DVector<f64> = vecs.column(1).into_owned();
    if zeros > 1 {
        warnings.push(format!(
            "degenerate Fiedler vector: graph has {zeros} connected components"
        ));
        let ones = DVector::from_element(l, 1.0 / (l as f64).sqrt());
        for c in 0..zeros {
            let col = vecs.column(c);
            let w = &col - &ones * ones.dot(&col);
            if w.norm() > 1e-8 {
                let norm = w.norm();
                v = w / norm;
                break;
            }
        }
    }
    let top = v.amax();
    let lead = (0..l).find(|&i| v[i].abs() >= top * (1.0 - FIEDLER_TIE_TOL)).unwrap_or(0);
    if v[lead] > 0.0 {
        v.neg_mut();
    }
    (Some(v.iter().copied().collect()), warnings)
}

/// Labels sorted by ascending Fiedler entry, near-equal entries by label.
pub fn fiedler_order(im: &MutualInfoGraph) -> OrderingResult {
    let l = im.modes();
    let (v, warnings) = fiedler_vector(im);
    let permutation = match v {
        None => Ordering::identity(l),
        Some(v) => Ordering::new(sort_with_ties(&v)).expect("argsort is a permutation"),
    };
    OrderingResult {
        method: Method::Fiedler,
        permutation,
        objective: None,
        bipartition: None,
        seed: None,
        warnings,
    }
}

fn sort_with_ties(v: &[f64]) -> Vec<usize> {
    let tol = FIEDLER_TIE_TOL * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(v.len());
    let mut start = 0;
    while start < idx.len() {
        let anchor = v[idx[start]];
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] - anchor <= tol {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_unstable();
        out.extend(group);
        start = end;
    }
    out
}

/// Fiedler order of a determinant, from the mutual information of its tensor.
pub fn fiedler_order_slater(u: &PartialIsometry) -> Result<OrderingResult> {
    let t = slater_coefficients(u)?;
    Ok(fiedler_order(&mutual_information(&t)?))
}

fn check_size(modes: usize, size: usize) -> Result<()> {
    if size == 0 || size >= modes {
        return Err(Error::Validation(format!("subset size {size} outside 1..{modes}")));
    }
    Ok(())
}

/// Lexicographically first minimizer of `objective` over all `size`-subsets.
fn exhaustive_min<F>(modes: usize, size: usize, cap: u128, objective: F) -> Result<(Vec<usize>, f64)>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    check_size(modes, size)?;
    let count = binomial(modes, size);
    if count > cap {
        return Err(Error::CapExceeded { size: count, cap });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for chunk in &(0..modes).combinations(size).chunks(CHUNK) {
        let chunk: Vec<Vec<usize>> = chunk.collect();
        let values: Vec<f64> = chunk.par_iter().map(|s| objective(s)).collect();
        for (s, v) in chunk.into_iter().zip(values) {
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((s, v));
            }
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Simulated annealing over `size`-subsets with Metropolis acceptance `exp(-delta/tau)`
/// and geometric cooling. Returns the best subset seen (sorted) and its objective.
fn anneal_min<F>(
    modes: usize,
    size: usize,
    initial: &[usize],
    cfg: &AnnealConfig,
    rng: &mut ChaCha8Rng,
    objective: F,
) -> Result<(Vec<usize>, f64)>
where
    F: Fn(&[usize]) -> f64,
{
    cfg.validate()?;
    check_size(modes, size)?;
    if initial.len() != size || initial.iter().any(|&i| i >= modes) || !initial.iter().all_unique() {
        return Err(Error::Validation(format!("initial subset {initial:?} is not a {size}-subset")));
    }
    let mut active: Vec<usize> = initial.to_vec();
    let mut virt: Vec<usize> = (0..modes).filter(|i| !active.contains(i)).collect();
    let mut current = objective(&sorted(&active));
    let mut best = (sorted(&active), current);
    let mut tau = cfg.t0;
    for _ in 0..cfg.iterations(modes, size) {
        tau *= cfg.decay;
        let a = rng.random_range(0..active.len());
        let b = rng.random_range(0..virt.len());
        std::mem::swap(&mut active[a], &mut virt[b]);
        let cand = objective(&sorted(&active));
        let delta = cand - current;
        let accept = delta < 0.0 || rng.random::<f64>() < (-delta / tau).exp();
        if accept {
            current = cand;
            if cand < best.1 {
                best = (sorted(&active), cand);
            }
        } else {
            std::mem::swap(&mut active[a], &mut virt[b]);
        }
    }
    Ok(best)
}

fn sorted(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v
}

/// Global minimum of the prefactor over bipartitions with `size` labels in front
/// (`size` defaults to `N`). Ties go to the lexicographically first subset.
pub fn best_prefactor_exhaustive(u: &PartialIsometry, size: Option<usize>, cap: u128) -> Result<OrderingResult> {
    let l = u.modes();
    let size = size.unwrap_or(u.particles());
    let (subset, p) = exhaustive_min(l, size, cap, |s| split_prefactor(u, s))?;
    OrderingResult::subset(Method::PrefactorExact, l, subset, p)
}

fn warm_subset(
    cfg: &AnnealConfig,
    modes: usize,
    size: usize,
    fiedler: Option<&Ordering>,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match (cfg.warm_start, fiedler) {
        (WarmStart::Fiedler, Some(f)) => f.as_slice()[..size].to_vec(),
        _ => {
            let mut all: Vec<usize> = (0..modes).collect();
            all.shuffle(rng);
            all.truncate(size);
            all
        }
    }
}

/// Annealed prefactor minimization. With a Fiedler warm start the Fiedler order of the
/// determinant is computed first unless supplied in `fiedler`.
pub fn anneal_prefactor(
    u: &PartialIsometry,
    size: Option<usize>,
    cfg: &AnnealConfig,
    fiedler: Option<&Ordering>,
) -> Result<OrderingResult> {
    cfg.validate()?;
    let l = u.modes();
    let size = size.unwrap_or(u.particles());
    check_size(l, size)?;
    let mut warnings = Vec::new();
    let computed;
    let fiedler = match (cfg.warm_start, fiedler) {
        (WarmStart::Fiedler, None) => {
            let r = fiedler_order_slater(u)?;
            warnings = r.warnings;
            computed = r.permutation;
            Some(&computed)
        }
        (_, f) => f,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = warm_subset(cfg, l, size, fiedler, &mut rng);
    let (subset, p) = anneal_min(l, size, &init, cfg, &mut rng, |s| split_prefactor(u, s))?;
    let mut r = OrderingResult::subset(Method::PrefactorAnneal, l, subset, p)?;
    r.seed = Some(cfg.seed);
    r.warnings = warnings;
    Ok(r)
}

/// `sum_I |alpha_I| p_I` for the bipartition placing `left` first.
pub fn weighted_prefactor(state: &CorrelatedState, left: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for (i, t) in state.terms().iter().enumerate() {
        total += t.amplitude.abs() * split_prefactor(&state.term_isometry(i)?, left);
    }
    Ok(total)
}

fn term_isometries(state: &CorrelatedState) -> Result<Vec<(f64, PartialIsometry)>> {
    state
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| Ok((t.amplitude.abs(), state.term_isometry(i)?)))
        .collect()
}

fn default_cut(modes: usize, cut: Option<usize>) -> usize {
    cut.unwrap_or(modes / 2)
}

/// Exhaustive minimum of the weighted prefactor over bipartitions with `cut` labels in
/// front (default `L/2`).
pub fn best_weighted_prefactor(state: &CorrelatedState, cut: Option<usize>, cap: u128) -> Result<OrderingResult> {
    let l = state.modes();
    let k = default_cut(l, cut);
    let terms = term_isometries(state)?;
    let (subset, p) = exhaustive_min(l, k, cap, |s| {
        terms.iter().map(|(a, u)| a * split_prefactor(u, s)).sum()
    })?;
    OrderingResult::subset(Method::WeightedPrefactor, l, subset, p)
}

/// Annealed weighted-prefactor minimization, same schedule as [`anneal_prefactor`].
pub fn anneal_weighted_prefactor(
    state: &CorrelatedState,
    cut: Option<usize>,
    cfg: &AnnealConfig,
    fiedler: Option<&Ordering>,
) -> Result<OrderingResult> {
    cfg.validate()?;
    let l = state.modes();
    let k = default_cut(l, cut);
    check_size(l, k)?;
    let terms = term_isometries(state)?;
    let mut warnings = Vec::new();
    let computed;
    let fiedler = match (cfg.warm_start, fiedler) {
        (WarmStart::Fiedler, None) => {
            let t = crate::tensor::correlated_tensor(state)?;
            let r = fiedler_order(&mutual_information(&t)?);
            warnings = r.warnings;
            computed = r.permutation;
            Some(&computed)
        }
        (_, f) => f,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = warm_subset(cfg, l, k, fiedler, &mut rng);
    let (subset, p) = anneal_min(l, k, &init, cfg, &mut rng, |s| {
        terms.iter().map(|(a, u)| a * split_prefactor(u, s)).sum()
    })?;
    let mut r = OrderingResult::subset(Method::WeightedPrefactor, l, subset, p)?;
    r.seed = Some(cfg.seed);
    r.warnings = warnings;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::random_partial_isometry;
    use crate::linalg::Matrix;
    use crate::tensor::tests::{angles, h2};
    use crate::tensor::Term;

    #[test]
    fn canonical_is_identity() {
        let r = canonical_order(4);
        assert_eq!(r.permutation.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(r.permutation.then(&r.permutation).unwrap(), r.permutation);
        assert!(r.objective.is_none());
    }

    #[test]
    fn h2_fiedler_groups_same_spin() {
        let (c, s, cp, sp) = angles(0.4, 1.1);
        let r = fiedler_order_slater(&h2(c, s, cp, sp)).unwrap();
        assert_eq!(r.permutation.as_slice(), &[0, 2, 1, 3]);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn zero_graph_is_identity_with_warning() {
        let im = MutualInfoGraph::new(Matrix::zeros(5, 5)).unwrap();
        let r = fiedler_order(&im);
        assert_eq!(r.permutation, Ordering::identity(5));
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn path_graph_recovers_identity() {
        let l = 7;
        let m = Matrix::from_fn(l, l, |a, b| if a.abs_diff(b) == 1 { 1.0 } else { 0.0 });
        let im = MutualInfoGraph::new(m).unwrap();
        let (v, w) = fiedler_vector(&im);
        assert!(w.is_empty());
        let v = v.unwrap();
        assert!(v.windows(2).all(|p| p[0] < p[1]));
        assert_eq!(fiedler_order(&im).permutation, Ordering::identity(l));
        let shuffled = Ordering::new(vec![3, 0, 6, 1, 5, 2, 4]).unwrap();
        let inv = shuffled.inverse();
        let relabelled = Matrix::from_fn(l, l, |a, b| {
            if inv.as_slice()[a].abs_diff(inv.as_slice()[b]) == 1 { 1.0 } else { 0.0 }
        });
        let r = fiedler_order(&MutualInfoGraph::new(relabelled).unwrap());
        assert_eq!(r.permutation, shuffled);
    }

    #[test]
    fn exhaustive_h2_finds_zero() {
        let (c, s, cp, sp) = angles(0.4, 1.1);
        let r = best_prefactor_exhaustive(&h2(c, s, cp, sp), None, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert!(r.objective.unwrap() < 1e-30);
        let b = r.bipartition.unwrap();
        assert!(b == vec![0, 2] || b == vec![1, 3]);
    }

    #[test]
    fn one_particle_prefers_extreme_weight() {
        let u = random_partial_isometry(1, 6, 11).unwrap();
        let r = best_prefactor_exhaustive(&u, None, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let w: Vec<f64> = (0..6).map(|j| u.column(j).norm_squared()).collect();
        let score = |x: f64| x * (1.0 - x);
        let expect = (0..6).min_by(|&a, &b| score(w[a]).total_cmp(&score(w[b]))).unwrap();
        assert_eq!(r.bipartition.unwrap(), vec![expect]);
        assert!((r.objective.unwrap() - score(w[expect])).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let u = random_partial_isometry(4, 10, 1).unwrap();
        let err = best_prefactor_exhaustive(&u, None, 100).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { size: 210, cap: 100 }));
    }

    #[test]
    fn anneal_reaches_h2_optimum_and_is_deterministic() {
        let (c, s, cp, sp) = angles(0.7, 0.2);
        let u = h2(c, s, cp, sp);
        for seed in 0..20 {
            let cfg = AnnealConfig { max_iter: Some(10), seed, warm_start: WarmStart::Random, ..Default::default() };
            let r = anneal_prefactor(&u, None, &cfg, None).unwrap();
            assert!(r.objective.unwrap() < 1e-30, "seed {seed}");
            assert_eq!(r, anneal_prefactor(&u, None, &cfg, None).unwrap());
        }
    }

    #[test]
    fn anneal_never_worse_than_start() {
        let u = random_partial_isometry(4, 9, 3).unwrap();
        let f = fiedler_order_slater(&u).unwrap().permutation;
        let start = split_prefactor(&u, &f.as_slice()[..4]);
        let cfg = AnnealConfig { max_iter: Some(1), ..Default::default() };
        let r = anneal_prefactor(&u, None, &cfg, Some(&f)).unwrap();
        assert!(r.objective.unwrap() <= start);
        let exact = best_prefactor_exhaustive(&u, None, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert!(exact.objective.unwrap() <= r.objective.unwrap());
    }

    #[test]
    fn bad_anneal_configs() {
        for cfg in [
            AnnealConfig { t0: 0.0, ..Default::default() },
            AnnealConfig { decay: 1.0, ..Default::default() },
            AnnealConfig { max_iter: Some(0), ..Default::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
        assert_eq!(AnnealConfig::default().iterations(16, 8), 6435);
        assert_eq!(AnnealConfig::default().iterations(5, 2), 5);
    }

    #[test]
    fn weighted_single_term_matches_plain() {
        let u = random_partial_isometry(3, 6, 8).unwrap();
        let state = CorrelatedState::single(u.clone());
        let a = best_weighted_prefactor(&state, Some(3), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let b = best_prefactor_exhaustive(&u, None, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(a.bipartition, b.bipartition);
        assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn weighted_dominates_dominant_term_optimum() {
        let orb = random_partial_isometry(5, 8, 21).unwrap();
        let (a0, a1) = (0.9f64.sqrt(), 0.1f64.sqrt());
        let state = CorrelatedState::new(
            orb,
            vec![
                Term { amplitude: a0, orbitals: vec![0, 1, 2] },
                Term { amplitude: a1, orbitals: vec![0, 3, 4] },
            ],
        )
        .unwrap();
        let w = best_weighted_prefactor(&state, None, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let dom = best_prefactor_exhaustive(&state.term_isometry(0).unwrap(), Some(4), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let at_dom = weighted_prefactor(&state, dom.bipartition.as_ref().unwrap()).unwrap();
        assert!(w.objective.unwrap() <= at_dom);
        let brute = (0..8)
            .combinations(4)
            .map(|s| weighted_prefactor(&state, &s).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(w.objective.unwrap(), brute);
    }

    #[test]
    fn method_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("prefactor".parse::<Method>().is_err());
    }

    #[test]
    fn result_json_round_trip() {
        let mut r = canonical_order(3);
        r.objective = Some(0.25);
        r.seed = Some(9);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<OrderingResult>(&s).unwrap(), r);
        assert!(serde_json::from_str::<OrderingResult>(r#"{"method":"fiedler","permutation":[0,0]}"#).is_err());
    }
}
