//! Random-state ensembles and per-index log-scale statistics of cut spectra under each
//! ordering method.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordering::{
    anneal_prefactor, anneal_weighted_prefactor, best_prefactor_exhaustive, best_weighted_prefactor,
    canonical_order, fiedler_order, AnnealConfig, Method, OrderingResult, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::rdm::mutual_information;
use crate::spectra::{cut_spectrum_dense, cut_spectrum_sectors, slater_cut_spectrum_block};
use crate::tensor::{correlated_tensor, CorrelatedState, Ordering, PartialIsometry, Term};

/// Floor substituted for exact zeros before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;
/// Per-trial tolerance on `sum sigma^2 = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// First `rows` rows of the orthogonal factor of a QR decomposition of an `L x L`
/// standard-normal matrix, with the triangular factor's diagonal made positive.
pub fn random_partial_isometry(rows: usize, modes: usize, seed: u64) -> Result<PartialIsometry> {
    if rows == 0 || rows > modes {
        return Err(Error::Validation(format!("cannot take {rows} rows of a {modes} x {modes} matrix")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(modes, modes, |_, _| StandardNormal.sample(&mut rng));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..modes {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    PartialIsometry::new(q.rows(0, rows).into_owned())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Slater,
    #[serde(alias = "weak")]
    WeakCorrelated,
    #[serde(alias = "strong")]
    StrongCorrelated,
}

impl Family {
    /// Orbital rows drawn for `n` particles.
    pub fn rows(self, n: usize) -> usize {
        match self {
            Family::Slater => n,
            Family::WeakCorrelated => n + 2,
            Family::StrongCorrelated => 2 * n - 2,
        }
    }

    /// Amplitudes and orbital sets of the superposition (0-based orbital labels).
    pub fn terms(self, n: usize) -> Result<Vec<Term>> {
        let base: Vec<usize> = (0..n).collect();
        match self {
            Family::Slater => Ok(vec![Term { amplitude: 1.0, orbitals: base }]),
            Family::WeakCorrelated | Family::StrongCorrelated => {
                if n < 2 || (self == Family::StrongCorrelated && n < 3) {
                    return Err(Error::Validation(format!("{self:?} needs more particles than {n}")));
                }
                let excited: Vec<usize> = (0..n - 2).chain([n, n + 1]).collect();
                if self == Family::WeakCorrelated {
                    Ok(vec![
                        Term { amplitude: 0.9f64.sqrt(), orbitals: base },
                        Term { amplitude: 0.1f64.sqrt(), orbitals: excited },
                    ])
                } else {
                    Ok(vec![
                        Term { amplitude: 0.4f64.sqrt(), orbitals: base },
                        Term { amplitude: 0.3f64.sqrt(), orbitals: excited },
                        Term { amplitude: 0.3f64.sqrt(), orbitals: (n - 2..2 * n - 2).collect() },
                    ])
                }
            }
        }
    }
}

/// Random state of the family with orbitals from [`random_partial_isometry`].
pub fn build_state(family: Family, particles: usize, modes: usize, seed: u64) -> Result<CorrelatedState> {
    let terms = family.terms(particles)?;
    let rows = family.rows(particles);
    if rows > modes {
        return Err(Error::Validation(format!(
            "{family:?} with N = {particles} needs {rows} orbitals but L = {modes}"
        )));
    }
    CorrelatedState::new(random_partial_isometry(rows, modes, seed)?, terms)
}

/// How a trial's cut spectrum is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumPath {
    /// SVD of every particle-number block.
    #[default]
    Sectors,
    /// Compound-matrix Gram formula for determinants, dense SVD when a block is rank deficient.
    Block,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub particles: usize,
    pub modes: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cut: Option<usize>,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub anneal: AnnealConfig,
    #[serde(default = "default_cap")]
    pub exhaustive_cap: u128,
    #[serde(default)]
    pub spectrum_path: SpectrumPath,
}

fn default_cap() -> u128 {
    DEFAULT_EXHAUSTIVE_CAP
}

impl ExperimentConfig {
    /// Configuration of the three reference ensembles at `N = 8, L = 16`.
    pub fn figure(figure: u8, trials: usize, seed: u64) -> Result<Self> {
        let (family, methods) = match figure {
            2 => (
                Family::Slater,
                vec![Method::Canonical, Method::Fiedler, Method::PrefactorExact, Method::PrefactorAnneal],
            ),
            3 => (
                Family::WeakCorrelated,
                vec![Method::Canonical, Method::Fiedler, Method::PrefactorExact, Method::WeightedPrefactor],
            ),
            4 => (
                Family::StrongCorrelated,
                vec![Method::Canonical, Method::Fiedler, Method::PrefactorExact, Method::WeightedPrefactor],
            ),
            _ => return Err(Error::Validation(format!("no preset for figure {figure}"))),
        };
        let cfg = Self {
            family,
            particles: 8,
            modes: 16,
            trials,
            seed,
            cut: None,
            methods,
            anneal: AnnealConfig::default(),
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            spectrum_path: SpectrumPath::Sectors,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn cut(&self) -> usize {
        self.cut.unwrap_or(self.modes / 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Validation("no methods requested".into()));
        }
        if self.cut.is_none() && self.modes % 2 != 0 {
            return Err(Error::Validation(format!("L = {} is odd; give the cut explicitly", self.modes)));
        }
        let k = self.cut();
        if k == 0 || k >= self.modes {
            return Err(Error::Validation(format!("cut {k} outside 1..{}", self.modes)));
        }
        if self.particles == 0 {
            return Err(Error::Validation("N must be positive".into()));
        }
        self.family.terms(self.particles)?;
        let rows = self.family.rows(self.particles);
        if rows > self.modes {
            return Err(Error::Validation(format!(
                "{:?} with N = {} needs {rows} orbitals but L = {}",
                self.family, self.particles, self.modes
            )));
        }
        if self.modes > crate::tensor::DEFAULT_MAX_MODES {
            return Err(Error::Capacity { modes: self.modes, cap: crate::tensor::DEFAULT_MAX_MODES });
        }
        self.anneal.validate()
    }
}

/// SplitMix64 of `master` advanced by `trial + 1` steps.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Spectra of one trial, one entry per requested method.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub seed: u64,
    pub orderings: Vec<OrderingResult>,
    pub spectra: Vec<Vec<f64>>,
    pub seconds: Vec<f64>,
    pub fallbacks: usize,
}

fn ordering_for(
    method: Method,
    cfg: &ExperimentConfig,
    state: &CorrelatedState,
    fiedler: &OrderingResult,
    seed: u64,
) -> Result<OrderingResult> {
    let k = cfg.cut();
    let l = cfg.modes;
    let dominant = || state.term_isometry(state.dominant_term());
    let anneal = cfg.anneal.with_seed(seed);
    match method {
        Method::Canonical => Ok(canonical_order(l)),
        Method::Fiedler => Ok(fiedler.clone()),
        Method::PrefactorExact => best_prefactor_exhaustive(&dominant()?, Some(k), cfg.exhaustive_cap),
        Method::PrefactorAnneal => anneal_prefactor(&dominant()?, Some(k), &anneal, Some(&fiedler.permutation)),
        Method::WeightedPrefactor => match best_weighted_prefactor(state, Some(k), cfg.exhaustive_cap) {
            Err(Error::CapExceeded { .. }) => {
                anneal_weighted_prefactor(state, Some(k), &anneal, Some(&fiedler.permutation))
            }
            r => r,
        },
    }
}

fn cut_values(cfg: &ExperimentConfig, state: &CorrelatedState, ordering: &Ordering) -> Result<(Vec<f64>, bool)> {
    let k = cfg.cut();
    let reordered = state.reorder(ordering)?;
    if cfg.spectrum_path == SpectrumPath::Block && reordered.terms().len() == 1 {
        match slater_cut_spectrum_block(&reordered.term_isometry(0)?, k) {
            Ok(s) => return Ok((s.values, false)),
            Err(Error::Degenerate { .. }) => {
                let t = correlated_tensor(&reordered)?;
                return Ok((cut_spectrum_dense(&t, k)?.values, true));
            }
            Err(e) => return Err(e),
        }
    }
    let t = correlated_tensor(&reordered)?;
    Ok((cut_spectrum_sectors(&t, k)?.values, false))
}

/// Builds the state of trial `t` and evaluates every requested method.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.seed, trial);
    let state = build_state(cfg.family, cfg.particles, cfg.modes, seed)?;
    let start = Instant::now();
    let fiedler = fiedler_order(&mutual_information(&correlated_tensor(&state)?)?);
    let fiedler_time = start.elapsed().as_secs_f64();
    let mut out = TrialOutcome {
        seed,
        orderings: Vec::new(),
        spectra: Vec::new(),
        seconds: Vec::new(),
        fallbacks: 0,
    };
    for &m in &cfg.methods {
        let start = Instant::now();
        let ordering = ordering_for(m, cfg, &state, &fiedler, seed)?;
        let (values, fell_back) = cut_values(cfg, &state, &ordering.permutation)?;
        let weight: f64 = values.iter().map(|v| v * v).sum();
        if (weight - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Consistency(format!(
                "trial {trial}, {m}: squared singular values sum to {weight}"
            )));
        }
        let mut secs = start.elapsed().as_secs_f64();
        if matches!(m, Method::Fiedler | Method::PrefactorAnneal) {
            secs += fiedler_time;
        }
        out.fallbacks += usize::from(fell_back);
        out.orderings.push(ordering);
        out.spectra.push(values);
        out.seconds.push(secs);
    }
    Ok(out)
}

/// Statistics of `log10 sigma_j` across trials for one index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    /// 1-based singular value index.
    pub index: usize,
    pub mean_log10: f64,
    pub std_log10: f64,
    pub median_log10: f64,
    pub q25_log10: f64,
    pub q75_log10: f64,
    pub zero_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub method: Method,
    pub rows: Vec<IndexStats>,
    pub seconds: f64,
}

impl MethodStats {
    /// Average of the mean `log10 sigma` over the 1-based index range `lo..=hi`.
    pub fn tail_mean(&self, lo: usize, hi: usize) -> f64 {
        let sel: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.index >= lo && r.index <= hi)
            .map(|r| r.mean_log10)
            .collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub methods: Vec<MethodStats>,
    pub trial_seeds: Vec<u64>,
    pub fallbacks: usize,
    pub warnings: Vec<String>,
}

impl EnsembleStats {
    pub fn get(&self, m: Method) -> Option<&MethodStats> {
        self.methods.iter().find(|s| s.method == m)
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-index statistics of the columns of `spectra` (one row per trial).
pub fn index_statistics(spectra: &[Vec<f64>]) -> Vec<IndexStats> {
    let dim = spectra.iter().map(Vec::len).max().unwrap_or(0);
    (0..dim)
        .map(|j| {
            let mut zero_count = 0;
            let mut logs: Vec<f64> = spectra
                .iter()
                .map(|s| {
                    let v = s.get(j).copied().unwrap_or(0.0);
                    if v < LOG_FLOOR {
                        zero_count += 1;
                    }
                    v.max(LOG_FLOOR).log10()
                })
                .collect();
            let n = logs.len() as f64;
            let mean = logs.iter().sum::<f64>() / n;
            let var = if logs.len() > 1 {
                logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            logs.sort_by(f64::total_cmp);
            IndexStats {
                index: j + 1,
                mean_log10: mean,
                std_log10: var.sqrt(),
                median_log10: quantile(&logs, 0.5),
                q25_log10: quantile(&logs, 0.25),
                q75_log10: quantile(&logs, 0.75),
                zero_count,
            }
        })
        .collect()
}

/// Runs every trial in parallel and aggregates in trial order, so the result does not
/// depend on the number of threads.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleStats> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<_>>()?;
    let mut warnings = BTreeMap::new();
    for o in &outcomes {
        for w in o.orderings.iter().flat_map(|r| &r.warnings) {
            *warnings.entry(w.clone()).or_insert(0usize) += 1;
        }
    }
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let spectra: Vec<Vec<f64>> = outcomes.iter().map(|o| o.spectra[i].clone()).collect();
            MethodStats {
                method: m,
                rows: index_statistics(&spectra),
                seconds: outcomes.iter().map(|o| o.seconds[i]).sum(),
            }
        })
        .collect();
    Ok(EnsembleStats {
        methods,
        trial_seeds: outcomes.iter().map(|o| o.seed).collect(),
        fallbacks: outcomes.iter().map(|o| o.fallbacks).sum(),
        warnings: warnings
            .into_iter()
            .map(|(w, n)| format!("{w} ({n} occurrences)"))
            .collect(),
    })
}
