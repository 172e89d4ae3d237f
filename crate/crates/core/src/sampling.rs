//! Seeded sampling helpers shared by the axiom fuzzers and the checkers.
//!
//! Everything here is a pure function of the seed, so reports built on top
//! of these samples are reproducible across runs and platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::maps::DomainBox;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform magnitude in `[1e-3, 10]`.
fn magnitude(rng: &mut SampleRng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..1.0))
}

/// Candidate vector for membership-filtered sampling of a cone.
///
/// Supports are one-hot, random subsets or dense in equal proportion; half
/// of the candidates are sign-positive. Sparse, small candidates are what
/// exposes a corrupted membership test near the boundary.
pub fn cone_candidate(rng: &mut SampleRng, dimension: usize) -> Vec<f64> {
    let mut v = vec![0.0; dimension];
    let positive = rng.gen_bool(0.5);
    let mode = rng.gen_range(0..3);
    for slot in v.iter_mut() {
        let alive = match mode {
            0 => false,
            1 => rng.gen_bool(0.5),
            _ => true,
        };
        if alive {
            *slot = magnitude(rng);
        }
    }
    if mode == 0 {
        let i = rng.gen_range(0..dimension);
        v[i] = magnitude(rng);
    }
    if !positive {
        for slot in v.iter_mut() {
            if rng.gen_bool(0.5) {
                *slot = -*slot;
            }
        }
    }
    v
}

/// Nonnegative scalar: zero with probability 1/8, otherwise log-uniform in `[1e-3, 1e3]`.
pub fn nonnegative_scalar(rng: &mut SampleRng) -> f64 {
    if rng.gen_bool(0.125) {
        0.0
    } else {
        10f64.powf(rng.gen_range(-3.0..3.0))
    }
}

pub fn uniform_in(rng: &mut SampleRng, domain: &DomainBox) -> Vec<f64> {
    domain
        .intervals()
        .iter()
        .map(|&(lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
        .collect()
}

/// `k` points of a uniform grid on `[lo, hi]`, endpoints included.
pub fn grid_1d(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * (i as f64 / (k - 1) as f64))
        .collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the given base (one Halton coordinate).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    acc
}

/// Point `index` of the Halton sequence in `[0, 1)^dims`, `dims <= 16`.
pub fn halton(index: u64, dims: usize) -> Vec<f64> {
    PRIMES[..dims]
        .iter()
        .map(|&b| radical_inverse(index + 1, b))
        .collect()
}

/// Deterministic-plus-random pairs over `domain × domain`.
///
/// Half of the budget (at least) is a deterministic design: for one-dimensional
/// domains an odd-sided regular grid of pairs, so the domain midpoint and both
/// endpoints are paired with every grid node; for higher dimensions a Halton
/// sequence in `2k` dimensions. The remainder is seeded uniform pairs.
pub fn sample_pairs(domain: &DomainBox, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let k = domain.dimension();
    let mut pairs = Vec::with_capacity(count);
    let deterministic = count.div_ceil(2);
    if k == 1 {
        let (lo, hi) = domain.intervals()[0];
        let mut side = ((deterministic as f64).sqrt().floor() as usize).max(1);
        if side.is_multiple_of(2) {
            side -= 1;
        }
        let nodes = grid_1d(lo, hi, side);
        for &x in &nodes {
            for &y in &nodes {
                pairs.push((vec![x], vec![y]));
            }
        }
    } else {
        let dims = (2 * k).min(PRIMES.len());
        for i in 0..deterministic as u64 {
            let u = halton(i, dims);
            let map = |offset: usize| -> Vec<f64> {
                domain
                    .intervals()
                    .iter()
                    .enumerate()
                    .map(|(j, &(lo, hi))| {
                        let s = u.get(offset + j).copied().unwrap_or(0.5);
                        lo + (hi - lo) * s
                    })
                    .collect()
            };
            pairs.push((map(0), map(k)));
        }
    }
    let mut r = rng(seed);
    while pairs.len() < count {
        let x = uniform_in(&mut r, domain);
        let y = uniform_in(&mut r, domain);
        pairs.push((x, y));
    }
    pairs.truncate(count);
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn pair_budget_is_exact_and_seeded() {
        let domain = DomainBox::new(vec![(-10.0, 10.0)]).unwrap();
        let a = sample_pairs(&domain, 1001, 7);
        let b = sample_pairs(&domain, 1001, 7);
        assert_eq!(a.len(), 1001);
        assert_eq!(a, b);
        assert!(a.iter().any(|(x, y)| x[0] == 10.0 && y[0] == 0.0));
    }

    #[test]
    fn multi_dimensional_pairs_stay_in_box() {
        let domain = DomainBox::new(vec![(0.0, 1.0), (-2.0, 2.0)]).unwrap();
        for (x, y) in sample_pairs(&domain, 200, 3) {
            assert!(domain.contains(&x) && domain.contains(&y));
        }
    }
}
