use rand::Rng;
use serde::Serialize;

use super::{multinomial, sum_of_draws, Estimate, LatticeType, TypeHistogram};
use crate::degree_model::DegreeDistribution;
use crate::error::{Error, Result};

/// Closed-neighborhood offsets in `Z^d`: `0, +e_1, -e_1, ..., +e_d, -e_d`.
fn offsets(d: usize) -> Vec<LatticeType> {
    let mut out = vec![vec![0i64; d]];
    for axis in 0..d {
        for sign in [1i64, -1] {
            let mut e = vec![0i64; d];
            e[axis] = sign;
            out.push(e);
        }
    }
    out
}

fn shifted(t: &[i64], e: &[i64]) -> LatticeType {
    t.iter().zip(e).map(|(a, b)| a + b).collect()
}

/// One generation of the multitype process: every individual of type `i`
/// has an `offspring`-distributed number of children, each placed
/// independently and uniformly on one of the `2d + 1` types `j` with
/// `|j - i|_1 <= 1`.
///
/// Draws are aggregated per type (total children, then one multinomial
/// split), which has the same law as per-individual draws.
pub fn multitype_step<R: Rng + ?Sized>(
    hist: &TypeHistogram,
    offspring: &DegreeDistribution,
    d: usize,
    rng: &mut R,
) -> TypeHistogram {
    let offsets = offsets(d);
    let uniform = vec![1.0 / offsets.len() as f64; offsets.len()];
    let mut next = TypeHistogram::new();
    for (t, &count) in hist.iter() {
        let children = sum_of_draws(count, offspring.masses(), rng);
        for (e, placed) in offsets.iter().zip(multinomial(children, &uniform, rng)) {
            next.add(shifted(t, e), placed);
        }
    }
    next
}

/// `Z_n` started from a single type-0 individual.
pub fn multitype_generations<R: Rng + ?Sized>(
    offspring: &DegreeDistribution,
    d: usize,
    generations: usize,
    rng: &mut R,
) -> TypeHistogram {
    let mut hist = TypeHistogram::singleton(vec![0; d], 1);
    for _ in 0..generations {
        if hist.is_empty() {
            break;
        }
        hist = multitype_step(&hist, offspring, d, rng);
    }
    hist
}

/// Endpoints of `count` independent `n`-step lazy walks from the origin, each
/// step `0` or `±e_j` with probability `1 / (2d + 1)`.
pub fn rw_representation<R: Rng + ?Sized>(n: usize, count: u64, d: usize, rng: &mut R) -> TypeHistogram {
    let steps = 2 * d + 1;
    let mut hist = TypeHistogram::new();
    let mut pos = vec![0i64; d];
    for _ in 0..count {
        pos.iter_mut().for_each(|x| *x = 0);
        for _ in 0..n {
            let s = rng.random_range(0..steps);
            if s > 0 {
                let axis = (s - 1) / 2;
                pos[axis] += if s % 2 == 1 { 1 } else { -1 };
            }
        }
        hist.add(pos.clone(), 1);
    }
    hist
}

/// The random-walk construction of `Z_n`: draw the generation size of the
/// single-type tree, then place every individual at the endpoint of an
/// independent lazy walk.
pub fn random_walk_histogram<R: Rng + ?Sized>(
    offspring: &DegreeDistribution,
    d: usize,
    generations: usize,
    rng: &mut R,
) -> TypeHistogram {
    let mut size = 1u64;
    for _ in 0..generations {
        if size == 0 {
            break;
        }
        size = sum_of_draws(size, offspring.masses(), rng);
    }
    rw_representation(generations, size, d, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationReport {
    /// Replicates with `|Z_n| >= M`.
    pub conditioned: usize,
    /// Fraction of those with `Z_n(k) >= delta M / n^{d/2}` on the whole ball.
    pub frequency: Estimate,
    pub bound: f64,
    pub indeterminate: bool,
}

impl ConcentrationReport {
    pub fn dominated(&self) -> bool {
        !self.indeterminate && self.frequency.dominates(self.bound)
    }
}

/// `1 - 2 (2r+1)^d exp(-delta^2 M / (8 n^d))`, clamped to `[0, 1]`.
pub fn concentration_bound(d: usize, n: usize, threshold: f64, r: usize, delta: f64) -> f64 {
    let ball = ((2 * r + 1) as f64).powi(d as i32);
    let rate = delta * delta * threshold / (8.0 * (n as f64).powi(d as i32));
    (1.0 - 2.0 * ball * (-rate).exp()).clamp(0.0, 1.0)
}

fn ball_points(d: usize, r: usize) -> Vec<LatticeType> {
    let r = r as i64;
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut grown = Vec::new();
        for p in &out {
            for x in -r..=r {
                let mut q = p.clone();
                q.push(x);
                grown.push(q);
            }
        }
        out = grown;
    }
    out.retain(|p| p.iter().map(|x| x.abs()).sum::<i64>() <= r);
    out
}

/// Conditional frequency of `{Z_n(k) >= delta M / n^{d/2} for all |k|_1 <= r}`
/// given `|Z_n| >= M`, next to its analytic lower bound.
#[allow(clippy::too_many_arguments)]
pub fn concentration_experiment<R: Rng + ?Sized>(
    offspring: &DegreeDistribution,
    d: usize,
    n: usize,
    threshold: u64,
    r: usize,
    delta: f64,
    replicates: usize,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    if replicates == 0 || !(delta >= 0.0) {
        return Err(Error::InvalidParameter("need replicates >= 1 and delta >= 0".into()));
    }
    let level = delta * threshold as f64 / (n.max(1) as f64).powf(d as f64 / 2.0);
    let ball = ball_points(d, r);
    let mut conditioned = 0;
    let mut hits = 0;
    for _ in 0..replicates {
        let z = multitype_generations(offspring, d, n, rng);
        if z.total() < threshold {
            continue;
        }
        conditioned += 1;
        if ball.iter().all(|k| z.get(k) as f64 >= level) {
            hits += 1;
        }
    }
    Ok(ConcentrationReport {
        conditioned,
        frequency: Estimate::from_counts(hits, conditioned),
        bound: concentration_bound(d, n, threshold as f64, r, delta),
        indeterminate: conditioned == 0,
    })
}
