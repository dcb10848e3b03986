use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spectra::CutSpectrum;

/// Target index `j` of the superposition and one index `j_I >= 1` per component, with
/// `sum j_I = j` (all 1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylAssignment {
    pub index: usize,
    pub parts: Vec<usize>,
}

/// Largest value of `sigma_j - sum_I |alpha_I| sigma^(I)_(j_I)` over the assignments.
/// Non-positive whenever the superposition bound holds.
pub fn weyl_bound_check(
    components: &[CutSpectrum],
    amplitudes: &[f64],
    total: &CutSpectrum,
    assignments: &[WeylAssignment],
) -> Result<f64> {
    if components.len() != amplitudes.len() || components.is_empty() {
        return Err(Error::Assignment(format!(
            "{} component spectra for {} amplitudes",
            components.len(),
            amplitudes.len()
        )));
    }
    if components.iter().any(|c| c.cut != total.cut || c.modes != total.modes) {
        return Err(Error::Assignment("component spectra belong to another cut".into()));
    }
    let dim = total.values.len();
    let mut worst = f64::NEG_INFINITY;
    for a in assignments {
        if a.index == 0 || a.index > dim {
            return Err(Error::Assignment(format!("index {} outside 1..={dim}", a.index)));
        }
        if a.parts.len() != components.len() {
            return Err(Error::Assignment(format!(
                "{} parts for {} components",
                a.parts.len(),
                components.len()
            )));
        }
        if a.parts.iter().any(|&p| p == 0) || a.parts.iter().sum::<usize>() != a.index {
            return Err(Error::Assignment(format!(
                "parts {:?} are not a composition of {} into positive indices",
                a.parts, a.index
            )));
        }
        let bound: f64 = a
            .parts
            .iter()
            .zip(components)
            .zip(amplitudes)
            .map(|((&p, c), alpha)| alpha.abs() * c.values.get(p - 1).copied().unwrap_or(0.0))
            .sum();
        worst = worst.max(total.values[a.index - 1] - bound);
    }
    Ok(worst)
}

/// Uniform random composition of `total` into `parts` positive integers, or `None` when
/// `total < parts`.
pub fn random_composition<R: Rng + ?Sized>(total: usize, parts: usize, rng: &mut R) -> Option<Vec<usize>> {
    if parts == 0 || total < parts {
        return None;
    }
    let mut cuts: Vec<usize> = sample(rng, total - 1, parts - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    Some(out)
}
