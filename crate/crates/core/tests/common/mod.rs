//! Seeded random corpora shared by the integration suites.
#![allow(dead_code)]

use cxorder::rational::{int, rat, Rational};
use cxorder::DiscreteDistribution;
use rand::seq::SliceRandom;
use rand::Rng;

/// Distribution on `{0..=top}` with masses in multiples of `1/denom`,
/// spread over a random subset of at most `max_atoms` points.
pub fn random_lattice_counts<R: Rng>(
    rng: &mut R,
    top: usize,
    denom: usize,
    max_atoms: usize,
) -> Vec<usize> {
    let mut points: Vec<usize> = (0..=top).collect();
    points.shuffle(rng);
    let atoms = rng.gen_range(1..=max_atoms.min(top + 1));
    let chosen = &points[..atoms];
    let mut counts = vec![0usize; top + 1];
    for _ in 0..denom {
        counts[*chosen.choose(rng).unwrap()] += 1;
    }
    counts
}

pub fn from_counts(counts: &[usize], denom: usize) -> DiscreteDistribution {
    DiscreteDistribution::from_atoms(
        counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(k, c)| (int(k as i64), rat(*c as i64, denom as i64))),
    )
    .unwrap()
}

fn lattice_sum(counts: &[usize]) -> usize {
    counts.iter().enumerate().map(|(k, c)| k * c).sum()
}

/// Moves one unit each from `k` to `k - j` and `k + j`, keeping the mean.
fn spread_once<R: Rng>(rng: &mut R, counts: &mut [usize]) -> bool {
    let top = counts.len() - 1;
    let candidates: Vec<usize> = (1..top).filter(|&k| counts[k] >= 2).collect();
    let Some(&k) = candidates.choose(rng) else {
        return false;
    };
    let reach = k.min(top - k);
    let j = rng.gen_range(1..=reach);
    counts[k] -= 2;
    counts[k - j] += 1;
    counts[k + j] += 1;
    true
}

/// An equal-mean pair on `{0..=top}` with masses of denominator at most
/// `max_denom`. Half of the pairs are mean-preserving spreads (so the order
/// usually holds), half are independent draws conditioned on equal means.
pub fn equal_mean_pair<R: Rng>(
    rng: &mut R,
    top: usize,
    max_denom: usize,
) -> (DiscreteDistribution, DiscreteDistribution) {
    let denom = rng.gen_range(2..=max_denom);
    if rng.gen_bool(0.5) {
        let lhs = random_lattice_counts(rng, top, denom, 5);
        let mut rhs = lhs.clone();
        let steps = rng.gen_range(1..=3);
        for _ in 0..steps {
            spread_once(rng, &mut rhs);
        }
        let (lhs, rhs) = (from_counts(&lhs, denom), from_counts(&rhs, denom));
        // reversed spreads fail the order
        if rng.gen_bool(0.3) {
            (rhs, lhs)
        } else {
            (lhs, rhs)
        }
    } else {
        loop {
            let a = random_lattice_counts(rng, top, denom, 5);
            let b = random_lattice_counts(rng, top, denom, 5);
            if lattice_sum(&a) == lattice_sum(&b) {
                return (from_counts(&a, denom), from_counts(&b, denom));
            }
        }
    }
}

/// Small distribution with rational support and masses, any mean.
pub fn random_distribution<R: Rng>(rng: &mut R) -> DiscreteDistribution {
    let atoms = rng.gen_range(1..=4);
    let weights: Vec<i64> = (0..atoms).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = weights.iter().sum();
    DiscreteDistribution::from_atoms(weights.iter().map(|&w| {
        (
            rat(rng.gen_range(-6..=12), rng.gen_range(1..=3)),
            rat(w, total),
        )
    }))
    .unwrap()
}

pub fn random_probability<R: Rng>(rng: &mut R, max_denom: i64) -> Rational {
    let q = rng.gen_range(2..=max_denom);
    rat(rng.gen_range(1..q), q)
}
