//! Galton-Watson and multitype branching processes on `Z^d` types, exact
//! lazy-walk distributions, the dominated offspring law and the ruin rate of
//! the associated random walk.

mod dominated;
mod galton_watson;
mod lazy_walk;
mod martingale;
mod multitype;

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

pub use dominated::{dominated_offspring, DominatedOffspring, IntegerPmf};
pub use galton_watson::{
    growth_time_experiment, gw_simulate, survival_estimate, GrowthReport, GwCaps, GwTrajectory,
};
pub use lazy_walk::{lazy_walk_pmf, ratio_check, LazyWalkPmf, MAX_TABLE_ENTRIES};
pub use martingale::{martingale_rate, ruin_check, RuinReport};
pub use multitype::{
    concentration_bound, concentration_experiment, multitype_generations, multitype_step,
    random_walk_histogram, rw_representation, ConcentrationReport,
};

/// A point of `Z^d`.
pub type LatticeType = Vec<i64>;

/// Individuals per type; zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeHistogram {
    counts: BTreeMap<LatticeType, u64>,
}

impl TypeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(t: LatticeType, count: u64) -> Self {
        let mut h = Self::new();
        h.add(t, count);
        h
    }

    pub fn add(&mut self, t: LatticeType, count: u64) {
        if count > 0 {
            *self.counts.entry(t).or_insert(0) += count;
        }
    }

    pub fn get(&self, t: &[i64]) -> u64 {
        self.counts.get(t).copied().unwrap_or(0)
    }

    /// `|Z_n|`.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeType, &u64)> {
        self.counts.iter()
    }

    pub fn distinct_types(&self) -> usize {
        self.counts.len()
    }
}

/// Sequential-binomial multinomial draw. `probs` should sum to 1; the last
/// cell takes whatever remains.
pub fn multinomial<R: Rng + ?Sized>(count: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = count;
    let mut mass_left = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || p >= mass_left {
            out[i] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let x = binomial(remaining, q, rng);
        out[i] = x;
        remaining -= x;
        mass_left -= p;
    }
    out
}

pub fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Sum of `count` independent draws from the pmf `masses` (values `0..`).
pub fn sum_of_draws<R: Rng + ?Sized>(count: u64, masses: &[f64], rng: &mut R) -> u64 {
    multinomial(count, masses, rng)
        .iter()
        .enumerate()
        .map(|(j, &c)| j as u64 * c)
        .sum()
}

/// A Monte Carlo frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_counts(successes: usize, samples: usize) -> Self {
        if samples == 0 {
            return Estimate { value: f64::NAN, std_error: f64::NAN, samples };
        }
        let p = successes as f64 / samples as f64;
        Estimate { value: p, std_error: (p * (1.0 - p) / samples as f64).sqrt(), samples }
    }

    /// Standard error used for one-sided comparisons against a reference
    /// probability `p0`: the larger of the empirical and reference errors.
    pub fn comparison_error(&self, p0: f64) -> f64 {
        let p0 = p0.clamp(0.0, 1.0);
        let reference = (p0 * (1.0 - p0) / self.samples.max(1) as f64).sqrt();
        self.std_error.max(reference)
    }

    /// `value >= lower - 3 se`.
    pub fn dominates(&self, lower: f64) -> bool {
        self.value + 3.0 * self.comparison_error(lower) >= lower
    }

    /// `value <= upper + 3 se`.
    pub fn below(&self, upper: f64) -> bool {
        self.value <= upper + 3.0 * self.comparison_error(upper)
    }
}
