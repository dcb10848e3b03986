//! Subsets, binomials and occupation bitstrings.
//!
//! Site `p` (0-based) of an `L`-mode tensor is stored at bit `L - 1 - p`, so the
//! first site is the most significant bit of the linear index.

/// Binomial coefficient, exact in `u128` for every size used here.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Mask with a single bit set for `site` in an `modes`-site register.
#[inline]
pub fn site_bit(modes: usize, site: usize) -> usize {
    1usize << (modes - 1 - site)
}

/// Bitstring with ones exactly at `sites`.
pub fn mask_of(modes: usize, sites: &[usize]) -> usize {
    sites.iter().fold(0, |m, &s| m | site_bit(modes, s))
}

/// Occupied sites of `mask` in ascending order.
pub fn sites_of(modes: usize, mask: usize) -> Vec<usize> {
    (0..modes).filter(|&s| mask & site_bit(modes, s) != 0).collect()
}

/// All masks of `modes` bits with exactly `weight` ones, in increasing numeric order.
pub fn masks_with_weight(modes: usize, weight: usize) -> Vec<usize> {
    if weight > modes {
        return Vec::new();
    }
    if weight == 0 {
        return vec![0];
    }
    let limit = 1usize << modes;
    let mut out = Vec::with_capacity(binomial(modes, weight) as usize);
    let mut v: usize = (1usize << weight) - 1;
    while v < limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount.
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// Lexicographically ordered `size`-subsets of `items`.
pub fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    if size == 0 {
        return vec![Vec::new()];
    }
    items.iter().copied().combinations(size).collect()
}

/// Parity (+1 / -1) of the permutation that sorts `seq` ascending.
pub fn sort_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
