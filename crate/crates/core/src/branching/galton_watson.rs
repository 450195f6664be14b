use rand::Rng;
use serde::Serialize;

use super::{sum_of_draws, Estimate};
use crate::degree_model::DegreeDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GwCaps {
    pub max_generations: usize,
    pub max_total: u64,
}

impl Default for GwCaps {
    fn default() -> Self {
        GwCaps { max_generations: 100_000, max_total: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwTrajectory {
    /// Generation sizes starting with the single root at generation 0.
    pub generations: Vec<u64>,
    /// All individuals ever born, root included.
    pub total_progeny: u64,
    pub extinct: bool,
}

/// Galton-Watson tree with one root drawing from `root` and every later
/// individual drawing from `offspring`. Stops on extinction or at a cap.
pub fn gw_simulate<R: Rng + ?Sized>(
    root: &DegreeDistribution,
    offspring: &DegreeDistribution,
    caps: GwCaps,
    rng: &mut R,
) -> Result<GwTrajectory> {
    if caps.max_generations == 0 || caps.max_total == 0 {
        return Err(Error::InvalidParameter("caps must be positive".into()));
    }
    let mut generations = vec![1u64, root.sampler().sample(rng) as u64];
    let mut total = 1 + generations[1];
    loop {
        let current = *generations.last().expect("nonempty");
        if current == 0 {
            return Ok(GwTrajectory { generations, total_progeny: total, extinct: true });
        }
        if generations.len() > caps.max_generations || total >= caps.max_total {
            return Ok(GwTrajectory { generations, total_progeny: total, extinct: false });
        }
        let next = sum_of_draws(current, offspring.masses(), rng);
        total += next;
        generations.push(next);
    }
}

/// Fraction of single-type trees (root and descendants drawing from
/// `offspring`) that reach a cap before dying out.
pub fn survival_estimate<R: Rng + ?Sized>(
    offspring: &DegreeDistribution,
    caps: GwCaps,
    replicates: usize,
    rng: &mut R,
) -> Result<Estimate> {
    let mut survived = 0;
    for _ in 0..replicates {
        if !gw_simulate(offspring, offspring, caps, rng)?.extinct {
            survived += 1;
        }
    }
    Ok(Estimate::from_counts(survived, replicates))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Replicates whose generation size reached `M`.
    pub conditioned: usize,
    /// Among those, the fraction with first passage at most `L M^tau`.
    pub frequency: Estimate,
    pub bound: f64,
    pub indeterminate: bool,
}

impl GrowthReport {
    pub fn dominated(&self) -> bool {
        !self.indeterminate && self.frequency.dominates(self.bound)
    }
}

/// Growth-time bound `1 - 2 exp(-2 (L - 1) M^tau)`, clamped to `[0, 1]`.
pub fn growth_bound(threshold: f64, tau: f64, l: f64) -> f64 {
    (1.0 - 2.0 * (-2.0 * (l - 1.0) * threshold.powf(tau)).exp()).clamp(0.0, 1.0)
}

/// Runs `T_0 = 1` trees until a generation of size at least `threshold`
/// appears, and measures how often that first generation `p` satisfies
/// `p <= L threshold^tau`.
pub fn growth_time_experiment<R: Rng + ?Sized>(
    offspring: &DegreeDistribution,
    threshold: u64,
    tau: f64,
    l: f64,
    replicates: usize,
    max_generations: usize,
    rng: &mut R,
) -> Result<GrowthReport> {
    if !(tau > 0.0 && tau < 1.0) || !(l > 1.0) {
        return Err(Error::InvalidParameter(format!("need tau in (0,1) and L > 1, got {tau}, {l}")));
    }
    let limit = l * (threshold as f64).powf(tau);
    let mut conditioned = 0;
    let mut fast = 0;
    for _ in 0..replicates {
        let mut size = 1u64;
        let mut generation = 0usize;
        while size > 0 && size < threshold && generation < max_generations {
            size = sum_of_draws(size, offspring.masses(), rng);
            generation += 1;
        }
        if size >= threshold {
            conditioned += 1;
            if generation as f64 <= limit {
                fast += 1;
            }
        }
    }
    Ok(GrowthReport {
        conditioned,
        frequency: Estimate::from_counts(fast, conditioned),
        bound: growth_bound(threshold as f64, tau, l),
        indeterminate: conditioned == 0,
    })
}
