//! Degree distributions, degree sequences and the generating-function
//! machinery behind the extinction probability.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus_graph::TorusLattice;

/// Tolerance on the total mass of a distribution literal.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Default tolerance of the extinction fixed-point iteration.
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-10;

const MAX_FIXED_POINT_ITERATIONS: usize = 1_000_000;

/// Size of the first Poisson term past the mean that is dropped.
const POISSON_TAIL: f64 = 1e-17;

/// A probability mass function on `0..=max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pmf: Vec<f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from masses indexed by degree.
    pub fn from_masses(mut pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidDistribution("empty pmf".into()));
        }
        if let Some(p) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("invalid mass {p}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        while pmf.len() > 1 && pmf[pmf.len() - 1] == 0.0 {
            pmf.pop();
        }
        Ok(DegreeDistribution { pmf })
    }

    pub fn from_map(map: &BTreeMap<usize, f64>) -> Result<Self> {
        let max = map.keys().next_back().copied().unwrap_or(0);
        let mut pmf = vec![0.0; max + 1];
        for (&j, &p) in map {
            pmf[j] = p;
        }
        Self::from_masses(pmf)
    }

    pub fn point_mass(degree: usize) -> Self {
        let mut pmf = vec![0.0; degree + 1];
        pmf[degree] = 1.0;
        DegreeDistribution { pmf }
    }

    /// Poisson(mu) truncated once the terms past the mean drop below
    /// `1e-17`, then renormalized.
    pub fn poisson(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidDistribution(format!("poisson mean {mu}")));
        }
        if mu == 0.0 {
            return Ok(Self::point_mass(0));
        }
        let mut pmf = Vec::new();
        let mut term = (-mu).exp();
        let mut j = 0usize;
        loop {
            pmf.push(term);
            if term < POISSON_TAIL && j as f64 >= mu {
                break;
            }
            j += 1;
            term *= mu / j as f64;
        }
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        Self::from_masses(pmf)
    }

    pub fn prob(&self, degree: usize) -> f64 {
        self.pmf.get(degree).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.pmf
    }

    /// Largest degree carrying positive mass.
    pub fn max_degree(&self) -> usize {
        self.pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(j, p)| (j * j) as f64 * p)
            .sum()
    }

    /// `E(D(D-2))`, positive exactly when the offspring law is supercritical.
    pub fn criticality(&self) -> f64 {
        self.second_moment() - 2.0 * self.mean()
    }

    /// `P(D* = i) = i P(D = i) / E(D)`.
    pub fn size_biased(&self) -> Result<Self> {
        let mean = self.mean();
        if mean <= 0.0 {
            return Err(Error::Domain("size biasing needs E(D) > 0".into()));
        }
        let pmf = self
            .pmf
            .iter()
            .enumerate()
            .map(|(j, p)| j as f64 * p / mean)
            .collect();
        Ok(DegreeDistribution { pmf })
    }

    /// Offspring law `Z_D = D* - 1` of non-root individuals.
    pub fn offspring(&self) -> Result<Self> {
        let biased = self.size_biased()?;
        let pmf = if biased.pmf.len() > 1 {
            biased.pmf[1..].to_vec()
        } else {
            vec![1.0]
        };
        Ok(DegreeDistribution { pmf })
    }

    /// Probability generating function `sum_j P(D = j) x^j` (Horner).
    pub fn pgf(&self, x: f64) -> f64 {
        self.pmf.iter().rev().fold(0.0, |acc, p| acc * x + p)
    }

    pub fn pgf_derivative(&self, x: f64) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, p)| acc * x + j as f64 * p)
    }

    /// Exact law of the quantile function restricted to `(0, 1 - eta)`:
    /// the top `eta` of the mass is removed and the rest renormalized.
    pub fn truncated(&self, eta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta = {eta} not in [0,1)")));
        }
        if eta == 0.0 {
            return Ok(self.clone());
        }
        let cut = 1.0 - eta;
        let mut pmf = Vec::with_capacity(self.pmf.len());
        let mut below = 0.0;
        for &p in &self.pmf {
            let upper = (below + p).min(cut);
            pmf.push((upper - below).max(0.0) / cut);
            below += p;
            if below >= cut {
                break;
            }
        }
        while pmf.len() > 1 && pmf[pmf.len() - 1] == 0.0 {
            pmf.pop();
        }
        Ok(DegreeDistribution { pmf })
    }

    pub fn sampler(&self) -> DegreeSampler {
        DegreeSampler::new(&self.pmf)
    }
}

/// Inverse-CDF sampler over a finite pmf.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    cumulative: Vec<f64>,
    top: usize,
}

impl DegreeSampler {
    fn new(pmf: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let top = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        DegreeSampler { cumulative, top }
    }

    /// Quantile function at `u`: the first degree whose CDF exceeds `u`.
    pub fn quantile(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.top)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.random::<f64>())
    }
}

/// One draw of `W^eta`, the quantile function evaluated at a uniform point
/// of `(0, 1 - eta)`.
pub fn truncated_quantile_sample<R: Rng + ?Sized>(
    sampler: &DegreeSampler,
    eta: f64,
    rng: &mut R,
) -> usize {
    sampler.quantile(rng.random::<f64>() * (1.0 - eta))
}

/// Extinction probability of the two-stage Galton-Watson tree whose root has
/// law `root` and every other individual has law `offspring`.
///
/// The minimal fixed point of the offspring pgf is found by monotone
/// iteration from 0; the result is the root pgf evaluated there.
pub fn extinction_probability(
    root: &DegreeDistribution,
    offspring: &DegreeDistribution,
    tol: f64,
) -> Result<f64> {
    let fixed = minimal_fixed_point(offspring, tol)?;
    Ok(root.pgf(fixed))
}

/// Smallest solution of `g(x) = x` in `[0, 1]` for the pgf `g` of `offspring`.
pub fn minimal_fixed_point(offspring: &DegreeDistribution, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol}")));
    }
    if offspring.prob(1) == 1.0 {
        return Ok(0.0);
    }
    if offspring.mean() <= 1.0 {
        return Ok(1.0);
    }
    let mut x = 0.0;
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let next = offspring.pgf(x);
        if (next - x).abs() < tol {
            return Ok(newton_polish(offspring, next));
        }
        x = next;
    }
    Err(Error::NoConvergence(MAX_FIXED_POINT_ITERATIONS))
}

/// Newton steps on `g(x) - x` from a point left of the minimal fixed point.
/// By convexity the iterates increase and never pass the root.
fn newton_polish(offspring: &DegreeDistribution, mut x: f64) -> f64 {
    for _ in 0..50 {
        let slope = offspring.pgf_derivative(x) - 1.0;
        if slope >= 0.0 {
            break;
        }
        let step = -(offspring.pgf(x) - x) / slope;
        if !(step > 0.0) || x + step > 1.0 {
            break;
        }
        x += step;
        if step < 1e-17 {
            break;
        }
    }
    x
}

/// `rho` for a degree law `D`: root law `D`, offspring law `D* - 1`.
pub fn rho(dist: &DegreeDistribution) -> Result<f64> {
    if dist.mean() == 0.0 {
        return Ok(1.0);
    }
    extinction_probability(dist, &dist.offspring()?, DEFAULT_FIXED_POINT_TOL)
}

/// Degrees of all `m k^d` vertices, compartment-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
    lattice: TorusLattice,
    m: usize,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>, lattice: TorusLattice, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        let expected = lattice.compartments() * m;
        if degrees.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "degree sequence has {} entries, expected m*k^d = {expected}",
                degrees.len()
            )));
        }
        Ok(DegreeSequence { degrees, lattice, m })
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn compartment(&self, i: usize) -> &[u32] {
        &self.degrees[i * self.m..(i + 1) * self.m]
    }

    pub fn total(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }
}

/// Draws every degree independently from `dist`. No parity correction.
pub fn sample_degree_sequence<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    lattice: TorusLattice,
    m: usize,
    rng: &mut R,
) -> Result<DegreeSequence> {
    let sampler = dist.sampler();
    let n = lattice.compartments() * m;
    let degrees = (0..n).map(|_| sampler.sample(rng) as u32).collect();
    DegreeSequence::new(degrees, lattice, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub max_pmf_deviation: f64,
    pub max_mu_deviation: f64,
    pub passed: bool,
}

/// Both convergence conditions, checked per compartment at tolerance `epsilon`.
pub fn check_convergence(
    seq: &DegreeSequence,
    dist: &DegreeDistribution,
    epsilon: f64,
) -> ConvergenceReport {
    let m = seq.m() as f64;
    let half_mean = dist.mean() / 2.0;
    let mut max_pmf_deviation: f64 = 0.0;
    let mut max_mu_deviation: f64 = 0.0;
    let mut counts = Vec::new();
    for i in 0..seq.lattice().compartments() {
        let slice = seq.compartment(i);
        let top = slice.iter().copied().max().unwrap_or(0) as usize;
        counts.clear();
        counts.resize(top.max(dist.masses().len() - 1) + 1, 0usize);
        for &deg in slice {
            counts[deg as usize] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            max_pmf_deviation = max_pmf_deviation.max((c as f64 / m - dist.prob(j)).abs());
        }
        let mu = slice.iter().map(|&x| x as f64).sum::<f64>() / 2.0;
        max_mu_deviation = max_mu_deviation.max((mu / m - half_mean).abs());
    }
    ConvergenceReport {
        max_pmf_deviation,
        max_mu_deviation,
        passed: max_pmf_deviation < epsilon && max_mu_deviation < epsilon,
    }
}

/// JSON literal: `{"pmf": {"0": 0.5, "3": 0.5}}` or `{"poisson": {"mu": 2.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DistributionLiteral {
    Pmf { pmf: BTreeMap<String, f64> },
    Poisson { poisson: PoissonParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub mu: f64,
}

impl DistributionLiteral {
    pub fn build(&self) -> Result<DegreeDistribution> {
        match self {
            DistributionLiteral::Pmf { pmf } => {
                let mut map = BTreeMap::new();
                for (key, &p) in pmf {
                    let j: usize = key.trim().parse().map_err(|_| {
                        Error::InvalidDistribution(format!("degree key {key:?} is not a nonnegative integer"))
                    })?;
                    *map.entry(j).or_insert(0.0) += p;
                }
                DegreeDistribution::from_map(&map)
            }
            DistributionLiteral::Poisson { poisson } => DegreeDistribution::poisson(poisson.mu),
        }
    }
}

pub fn parse_distribution(text: &str) -> Result<DegreeDistribution> {
    let literal: DistributionLiteral = serde_json::from_str(text)
        .map_err(|e| Error::InvalidDistribution(format!("{e}")))?;
    literal.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn mixture() -> DegreeDistribution {
        DegreeDistribution::from_masses(vec![0.0, 0.5, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn size_biased_examples() {
        let biased = mixture().size_biased().unwrap();
        assert!((biased.prob(1) - 0.25).abs() < 1e-15);
        assert!((biased.prob(3) - 0.75).abs() < 1e-15);

        let c = DegreeDistribution::point_mass(4).size_biased().unwrap();
        assert_eq!(c, DegreeDistribution::point_mass(4));

        let zero_heavy = DegreeDistribution::from_masses(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let biased = zero_heavy.size_biased().unwrap();
        assert_eq!(biased.prob(0), 0.0);
        assert_eq!(biased.prob(3), 1.0);

        assert!(DegreeDistribution::point_mass(0).size_biased().is_err());
    }

    #[test]
    fn offspring_examples() {
        let z = mixture().offspring().unwrap();
        assert!((z.prob(0) - 0.25).abs() < 1e-15);
        assert!((z.prob(2) - 0.75).abs() < 1e-15);
        assert_eq!(
            DegreeDistribution::point_mass(2).offspring().unwrap(),
            DegreeDistribution::point_mass(1)
        );
    }

    #[test]
    fn poisson_is_its_own_offspring_law() {
        let pois = DegreeDistribution::poisson(2.0).unwrap();
        let z = pois.offspring().unwrap();
        let mut term = (-2.0f64).exp();
        for j in 0..=50usize {
            if j > 0 {
                term *= 2.0 / j as f64;
            }
            assert!((z.prob(j) - term).abs() < 1e-10, "j = {j}");
        }
    }

    #[test]
    fn pgf_examples() {
        assert!((mixture().pgf(1.0) - 1.0).abs() < 1e-15);
        let z = DegreeDistribution::from_masses(vec![0.25, 0.0, 0.75]).unwrap();
        assert!((z.pgf(1.0 / 3.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(DegreeDistribution::point_mass(0).pgf(0.37), 1.0);
    }

    #[test]
    fn extinction_examples() {
        let z = DegreeDistribution::from_masses(vec![0.25, 0.0, 0.75]).unwrap();
        let fixed = minimal_fixed_point(&z, 1e-12).unwrap();
        assert!((fixed - 1.0 / 3.0).abs() < 1e-10);
        let rho = extinction_probability(&mixture(), &z, 1e-12).unwrap();
        assert!((rho - 5.0 / 27.0).abs() < 1e-10);

        let sub = DegreeDistribution::from_masses(vec![0.5, 0.5]).unwrap();
        assert_eq!(extinction_probability(&mixture(), &sub, 1e-10).unwrap(), 1.0);

        let pois = DegreeDistribution::poisson(2.0).unwrap();
        let r = extinction_probability(&pois, &pois, 1e-10).unwrap();
        assert!((r - 0.203_187_869_979_979).abs() < 1e-8, "{r}");
    }

    #[test]
    fn extinction_straddles_criticality() {
        // offspring {0: 1-p, 2: p}: mean 2p, minimal fixed point (1-p)/p above criticality
        for &p in &[0.3, 0.45, 0.5, 0.51, 0.6, 0.9] {
            let z = DegreeDistribution::from_masses(vec![1.0 - p, 0.0, p]).unwrap();
            let fixed = minimal_fixed_point(&z, 1e-13).unwrap();
            if 2.0 * p <= 1.0 {
                assert_eq!(fixed, 1.0);
            } else {
                assert!((fixed - (1.0 - p) / p).abs() < 1e-9, "p = {p}: {fixed}");
                assert!(fixed < 1.0);
            }
        }
        // immortal line
        assert_eq!(minimal_fixed_point(&DegreeDistribution::point_mass(1), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn truncation_examples() {
        let d = DegreeDistribution::from_masses(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(d.truncated(0.5).unwrap(), DegreeDistribution::point_mass(0));
        let q = DegreeDistribution::from_masses(vec![0.25, 0.0, 0.75]).unwrap();
        let t = q.truncated(0.5).unwrap();
        assert!((t.prob(0) - 0.5).abs() < 1e-15);
        assert!((t.prob(2) - 0.5).abs() < 1e-15);
        assert_eq!(q.truncated(0.0).unwrap(), q);
        assert!(q.truncated(1.0).is_err());
    }

    #[test]
    fn quantile_sampler_matches_truncated_pmf() {
        let q = DegreeDistribution::from_masses(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let eta = 0.35;
        let exact = q.truncated(eta).unwrap();
        let sampler = q.sampler();
        let mut rng = rng::master(11);
        let draws = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[truncated_quantile_sample(&sampler, eta, &mut rng)] += 1;
        }
        for (j, &count) in counts.iter().enumerate() {
            let p = exact.prob(j);
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((count as f64 / draws as f64 - p).abs() <= 4.0 * se + 1e-12);
        }
        assert!(counts[3] > 0 && exact.max_degree() == 3);
    }

    #[test]
    fn sample_degree_sequence_point_masses() {
        let lattice = TorusLattice::new(1, 4).unwrap();
        let mut rng = rng::master(1);
        let seq = sample_degree_sequence(&DegreeDistribution::point_mass(3), lattice, 10, &mut rng)
            .unwrap();
        assert_eq!(seq.len(), 40);
        assert!(seq.degrees().iter().all(|&d| d == 3));
        let zero = sample_degree_sequence(&DegreeDistribution::point_mass(0), lattice, 5, &mut rng)
            .unwrap();
        assert!(zero.degrees().iter().all(|&d| d == 0));
    }

    #[test]
    fn sample_degree_sequence_per_compartment_fractions() {
        // Binomial(10^4, 1/2): P(|X/m - 1/2| > 0.02) = P(|Z| > 4) ~ 6e-5 per compartment,
        // so four compartments stay within 0.02 with probability > 0.999.
        let lattice = TorusLattice::new(1, 4).unwrap();
        let mut rng = rng::master(2);
        let seq = sample_degree_sequence(&mixture(), lattice, 10_000, &mut rng).unwrap();
        for i in 0..4 {
            let threes = seq.compartment(i).iter().filter(|&&d| d == 3).count();
            assert!((threes as f64 / 1e4 - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn convergence_examples() {
        let lattice = TorusLattice::new(1, 3).unwrap();
        let exact = DegreeSequence::new(vec![1, 3, 3, 1, 1, 3], lattice, 2).unwrap();
        let report = check_convergence(&exact, &mixture(), 0.1);
        assert_eq!(report.max_pmf_deviation, 0.0);
        assert_eq!(report.max_mu_deviation, 0.0);
        assert!(report.passed);

        let threes = DegreeSequence::new(vec![3; 6], lattice, 2).unwrap();
        let report = check_convergence(&threes, &DegreeDistribution::point_mass(3), 0.1);
        assert_eq!(report.max_mu_deviation, 0.0);
        assert!(report.passed);

        let blocked = DegreeSequence::new(vec![0, 0, 1, 3, 3, 1], lattice, 2).unwrap();
        let report = check_convergence(&blocked, &mixture(), 0.1);
        assert!(report.max_pmf_deviation >= 0.5);
        assert!(!report.passed);
    }

    #[test]
    fn parse_literals() {
        let d = parse_distribution(r#"{"pmf": {"0": 0.5, "3": 0.5}}"#).unwrap();
        assert_eq!(d.prob(3), 0.5);
        let p = parse_distribution(r#"{"poisson": {"mu": 2.0}}"#).unwrap();
        assert!((p.mean() - 2.0).abs() < 1e-9);
        assert!(parse_distribution(r#"{"pmf": {"a": 1.0}}"#).is_err());
        assert!(parse_distribution(r#"{"pmf": {"1": 0.7}}"#).is_err());
    }
}
