use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{bound_a_n, BoundInputs};
use super::config::{side_for, ScenarioConfig, ScheduleEntry};
use super::output::{fmt_opt, ScenarioOutput, Table};
use crate::branching::Estimate;
use crate::components::{connected_components, max_blocking_gap, summarize};
use crate::degree_model::{minimal_fixed_point, rho, sample_degree_sequence, DegreeDistribution, DEFAULT_FIXED_POINT_TOL};
use crate::error::{Error, Result};
use crate::exploration::{Explorer, Outcome, StopRule};
use crate::rng::{stream, SimRng};
use crate::torus_graph::{generate, percolate, MultiGraph, TorusLattice};

/// Runs `f` once per replicate on its own random stream. Streams are keyed by
/// `(seed, base + replicate)`, so the result does not depend on scheduling.
fn per_replicate<T, F>(seed: u64, base: u64, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> Result<T> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|r| f(r, &mut stream(seed, base + r as u64)))
        .collect()
}

/// Stream block of the `cell`-th point of a multi-point scenario.
fn cell_base(cell: usize) -> u64 {
    (cell as u64) << 32
}

pub fn sample_graph<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    d: usize,
    k: usize,
    m: usize,
    rng: &mut R,
) -> Result<MultiGraph> {
    let lattice = TorusLattice::new(d, k)?;
    let seq = sample_degree_sequence(dist, lattice, m, rng)?;
    Ok(generate(&seq, rng))
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn require_d1(config: &ScenarioConfig) -> Result<()> {
    if config.d != 1 {
        return Err(Error::DimensionMismatch(config.d));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiantReplicate {
    pub replicate: usize,
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub l1_frac: f64,
    pub census_size: usize,
    pub census_match: bool,
    pub spread_min: usize,
    pub spread_max: usize,
    pub leftover_stubs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiantSummary {
    pub replicates: usize,
    pub n: usize,
    pub mean_l1_frac: f64,
    pub sd_l1_frac: f64,
    pub rho: f64,
    /// `1 - rho`.
    pub target: f64,
    pub mean_l2: f64,
    pub max_l2: usize,
    /// `l2_beta ln m`.
    pub l2_bound: f64,
    pub census_match_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GiantRun {
    pub rows: Vec<GiantReplicate>,
    pub summary: GiantSummary,
}

pub fn run_giant_component(config: &ScenarioConfig) -> Result<GiantRun> {
    config.validate()?;
    let dist = config.distribution()?;
    let (k, m) = (config.require_k()?, config.require_m()?);
    let rows = per_replicate(config.seed, 0, config.replicates, |r, rng| {
        let graph = sample_graph(&dist, config.d, k, m, rng)?;
        let report = connected_components(&graph);
        let s = summarize(&graph, &report, config.beta)?;
        Ok(GiantReplicate {
            replicate: r,
            n: s.n,
            l1: s.l1,
            l2: s.l2,
            l1_frac: s.l1 as f64 / s.n as f64,
            census_size: s.census_size,
            census_match: s.matches_l1,
            spread_min: s.spread_min,
            spread_max: s.spread_max,
            leftover_stubs: graph.leftover().iter().map(|&x| x as u64).sum(),
        })
    })?;
    let fracs: Vec<f64> = rows.iter().map(|r| r.l1_frac).collect();
    let (mean_l1_frac, sd_l1_frac) = mean_and_sd(&fracs);
    let rho = rho(&dist)?;
    let count = rows.len() as f64;
    let summary = GiantSummary {
        replicates: rows.len(),
        n: rows[0].n,
        mean_l1_frac,
        sd_l1_frac,
        rho,
        target: 1.0 - rho,
        mean_l2: rows.iter().map(|r| r.l2 as f64).sum::<f64>() / count,
        max_l2: rows.iter().map(|r| r.l2).max().unwrap_or(0),
        l2_bound: config.l2_beta * (m.max(2) as f64).ln(),
        census_match_rate: rows.iter().filter(|r| r.census_match).count() as f64 / count,
    };
    Ok(GiantRun { rows, summary })
}

impl GiantRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&[
            "row", "replicate", "n", "l1", "l2", "l1_frac", "census_size", "census_match",
            "spread_min", "spread_max", "leftover_stubs", "sd_l1_frac", "target", "l2_bound",
        ]);
        for r in &self.rows {
            t.push(vec![
                "replicate".into(),
                r.replicate.to_string(),
                r.n.to_string(),
                r.l1.to_string(),
                r.l2.to_string(),
                r.l1_frac.to_string(),
                r.census_size.to_string(),
                r.census_match.to_string(),
                r.spread_min.to_string(),
                r.spread_max.to_string(),
                r.leftover_stubs.to_string(),
                String::new(),
                self.summary.target.to_string(),
                self.summary.l2_bound.to_string(),
            ]);
        }
        let s = &self.summary;
        // summary: mean l1, max l2, mean l1 fraction, census match rate
        t.push(vec![
            "summary".into(),
            String::new(),
            s.n.to_string(),
            (s.mean_l1_frac * s.n as f64).to_string(),
            s.max_l2.to_string(),
            s.mean_l1_frac.to_string(),
            String::new(),
            s.census_match_rate.to_string(),
            String::new(),
            String::new(),
            String::new(),
            s.sd_l1_frac.to_string(),
            s.target.to_string(),
            s.l2_bound.to_string(),
        ]);
        ScenarioOutput::new("giant", config, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReplicate {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub replicate: usize,
    pub l1: usize,
    pub l1_frac: f64,
    /// Largest run of consecutive non-blocking compartments, if any block.
    pub max_gap: Option<usize>,
    /// `m (gap + 2)`, or `n` without blocking compartments.
    pub gap_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexamplePoint {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub mean_l1_frac: f64,
    pub sd_l1_frac: f64,
    pub within_gap_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRun {
    pub rows: Vec<CounterexampleReplicate>,
    pub points: Vec<CounterexamplePoint>,
    pub strictly_decreasing: bool,
    /// `1 - rho` without geometric constraints.
    pub unconstrained_fraction: f64,
    pub warnings: Vec<String>,
}

fn counterexample_point(
    config: &ScenarioConfig,
    dist: &DegreeDistribution,
    entry: ScheduleEntry,
    cell: usize,
) -> Result<Vec<CounterexampleReplicate>> {
    per_replicate(config.seed, cell_base(cell), config.replicates, |r, rng| {
        let graph = sample_graph(dist, 1, entry.k, entry.m, rng)?;
        let report = connected_components(&graph);
        let max_gap = max_blocking_gap(&graph)?;
        let n = graph.vertex_count();
        Ok(CounterexampleReplicate {
            n,
            k: entry.k,
            m: entry.m,
            replicate: r,
            l1: report.largest(),
            l1_frac: report.largest() as f64 / n as f64,
            max_gap,
            gap_bound: max_gap.map_or(n, |g| (entry.m * (g + 2)).min(n)),
        })
    })
}

pub fn run_counterexample(config: &ScenarioConfig) -> Result<CounterexampleRun> {
    config.validate()?;
    require_d1(config)?;
    let dist = config.distribution()?;
    let schedule = config.resolved_schedule()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (cell, &entry) in schedule.iter().enumerate() {
        let reps = counterexample_point(config, &dist, entry, cell)?;
        let fracs: Vec<f64> = reps.iter().map(|r| r.l1_frac).collect();
        let (mean_l1_frac, sd_l1_frac) = mean_and_sd(&fracs);
        points.push(CounterexamplePoint {
            n: entry.m * entry.k,
            k: entry.k,
            m: entry.m,
            mean_l1_frac,
            sd_l1_frac,
            within_gap_bound: reps.iter().all(|r| r.l1 <= r.gap_bound),
        });
        rows.extend(reps);
    }
    let strictly_decreasing = points.windows(2).all(|w| w[1].mean_l1_frac < w[0].mean_l1_frac);
    let warnings = ScenarioConfig::schedule_warnings(&schedule);
    Ok(CounterexampleRun {
        rows,
        points,
        strictly_decreasing,
        unconstrained_fraction: 1.0 - rho(&dist)?,
        warnings,
    })
}

impl CounterexampleRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&[
            "row", "n", "k", "m", "replicate", "l1", "l1_frac", "max_gap", "gap_bound", "sd_l1_frac",
            "unconstrained_fraction", "strictly_decreasing",
        ]);
        for r in &self.rows {
            t.push(vec![
                "replicate".into(),
                r.n.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                r.replicate.to_string(),
                r.l1.to_string(),
                r.l1_frac.to_string(),
                fmt_opt(r.max_gap),
                r.gap_bound.to_string(),
                String::new(),
                self.unconstrained_fraction.to_string(),
                String::new(),
            ]);
        }
        for p in &self.points {
            t.push(vec![
                "summary".into(),
                p.n.to_string(),
                p.k.to_string(),
                p.m.to_string(),
                String::new(),
                String::new(),
                p.mean_l1_frac.to_string(),
                String::new(),
                p.within_gap_bound.to_string(),
                p.sd_l1_frac.to_string(),
                self.unconstrained_fraction.to_string(),
                self.strictly_decreasing.to_string(),
            ]);
        }
        ScenarioOutput::new("counterexample", config, t).with_warnings(&self.warnings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureCell {
    pub lambda: f64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub mean_l1_frac: f64,
    pub std_error: f64,
    /// `lambda < -1 / ln P(D <= 1)`: no giant component in this regime.
    pub no_giant_regime: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRun {
    pub cells: Vec<ConjectureCell>,
    /// `-1 / ln P(D <= 1)`.
    pub regime_threshold: f64,
    pub unconstrained_fraction: f64,
}

pub fn run_conjecture_scan(config: &ScenarioConfig) -> Result<ConjectureRun> {
    config.validate()?;
    require_d1(config)?;
    if config.lambdas.is_empty() || config.n_values.is_empty() {
        return Err(Error::Config("lambdas and n_values are required".into()));
    }
    let dist = config.distribution()?;
    let p = dist.prob(0) + dist.prob(1);
    let regime_threshold = -1.0 / p.ln();
    let mut cells = Vec::new();
    for (i, &lambda) in config.lambdas.iter().enumerate() {
        for (j, &n) in config.n_values.iter().enumerate() {
            let m = ((lambda * (n as f64).ln()).round() as usize).max(1);
            let k = side_for(n, m, 1);
            let cell = i * config.n_values.len() + j;
            let fracs = per_replicate(config.seed, cell_base(cell), config.replicates, |_, rng| {
                let graph = sample_graph(&dist, 1, k, m, rng)?;
                Ok(connected_components(&graph).largest() as f64 / graph.vertex_count() as f64)
            })?;
            let (mean, sd) = mean_and_sd(&fracs);
            cells.push(ConjectureCell {
                lambda,
                n,
                k,
                m,
                mean_l1_frac: mean,
                std_error: sd / (fracs.len() as f64).sqrt(),
                no_giant_regime: lambda < regime_threshold,
            });
        }
    }
    Ok(ConjectureRun { cells, regime_threshold, unconstrained_fraction: 1.0 - rho(&dist)? })
}

impl ConjectureRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&[
            "lambda", "n", "k", "m", "mean_l1_frac", "std_error", "no_giant_regime", "regime_threshold",
            "unconstrained_fraction",
        ]);
        for c in &self.cells {
            t.push(vec![
                c.lambda.to_string(),
                c.n.to_string(),
                c.k.to_string(),
                c.m.to_string(),
                c.mean_l1_frac.to_string(),
                c.std_error.to_string(),
                c.no_giant_regime.to_string(),
                self.regime_threshold.to_string(),
                self.unconstrained_fraction.to_string(),
            ]);
        }
        ScenarioOutput::new("conjecture", config, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationPoint {
    pub p_keep: f64,
    pub mean_l1: f64,
    pub mean_l1_frac: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercolationRun {
    pub points: Vec<PercolationPoint>,
}

/// Every replicate samples one graph and thins it at each `p_keep` in turn.
pub fn run_percolation(config: &ScenarioConfig) -> Result<PercolationRun> {
    config.validate()?;
    require_d1(config)?;
    if config.p_keep.is_empty() {
        return Err(Error::Config("p_keep grid is required".into()));
    }
    let dist = config.distribution()?;
    let (k, m) = (config.require_k()?, config.require_m()?);
    let per_rep = per_replicate(config.seed, 0, config.replicates, |_, rng| {
        let graph = sample_graph(&dist, 1, k, m, rng)?;
        config
            .p_keep
            .iter()
            .map(|&p| {
                let thinned = percolate(&graph, p, rng)?;
                Ok(connected_components(&thinned).largest())
            })
            .collect::<Result<Vec<usize>>>()
    })?;
    let n = (k * m) as f64;
    let points = config
        .p_keep
        .iter()
        .enumerate()
        .map(|(j, &p_keep)| {
            let l1: Vec<f64> = per_rep.iter().map(|r| r[j] as f64).collect();
            let (mean, sd) = mean_and_sd(&l1);
            PercolationPoint {
                p_keep,
                mean_l1: mean,
                mean_l1_frac: mean / n,
                std_error: sd / n / (l1.len() as f64).sqrt(),
            }
        })
        .collect();
    Ok(PercolationRun { points })
}

impl PercolationRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&["p_keep", "mean_l1", "mean_l1_frac", "std_error"]);
        for p in &self.points {
            t.push(vec![
                p.p_keep.to_string(),
                p.mean_l1.to_string(),
                p.mean_l1_frac.to_string(),
                p.std_error.to_string(),
            ]);
        }
        ScenarioOutput::new("percolation", config, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionRun {
    /// Small-root fraction per replicate.
    pub per_replicate: Vec<Estimate>,
    /// Pooled over all roots.
    pub frequency: Estimate,
    pub rho: f64,
    /// `beta ln m`.
    pub threshold: f64,
}

/// Fraction of uniformly chosen roots whose component has at most
/// `beta ln m` vertices.
pub fn run_extinction_convergence(config: &ScenarioConfig) -> Result<ExtinctionRun> {
    config.validate()?;
    let dist = config.distribution()?;
    let (k, m) = (config.require_k()?, config.require_m()?);
    let threshold = config.beta * (m.max(2) as f64).ln();
    let counts = per_replicate(config.seed, 0, config.replicates, |_, rng| {
        let graph = sample_graph(&dist, config.d, k, m, rng)?;
        let report = connected_components(&graph);
        let n = graph.vertex_count();
        Ok((0..config.roots)
            .filter(|_| report.component_size_of(rng.random_range(0..n)) as f64 <= threshold)
            .count())
    })?;
    let per_replicate = counts.iter().map(|&c| Estimate::from_counts(c, config.roots)).collect();
    let frequency = Estimate::from_counts(counts.iter().sum(), config.roots * counts.len());
    Ok(ExtinctionRun { per_replicate, frequency, rho: rho(&dist)?, threshold })
}

impl ExtinctionRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&["row", "replicate", "roots", "frequency", "std_error", "rho", "threshold"]);
        let rows = self.per_replicate.iter().enumerate().map(|(i, e)| ("replicate", i.to_string(), e));
        for (kind, rep, e) in rows.chain(std::iter::once(("summary", String::new(), &self.frequency))) {
            t.push(vec![
                kind.into(),
                rep,
                e.samples.to_string(),
                e.value.to_string(),
                e.std_error.to_string(),
                self.rho.to_string(),
                self.threshold.to_string(),
            ]);
        }
        ScenarioOutput::new("extinction", config, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationRun {
    pub frequency: Estimate,
    pub mean_attempts: f64,
    pub threshold: usize,
    pub budget: usize,
    /// Survival probability of the offspring law `q`.
    pub survival: f64,
    pub bound: f64,
    pub dominated: bool,
}

/// Repeated explorations from uniformly chosen compartments, each trying to
/// reveal `threshold` vertices within a shared budget of `delta m`
/// exposures, against the analytic success bound.
pub fn run_exploration_success(config: &ScenarioConfig) -> Result<ExplorationRun> {
    config.validate()?;
    let dist = config.distribution()?;
    let (k, m) = (config.require_k()?, config.require_m()?);
    let threshold = config.threshold.unwrap_or_else(|| (m as f64).powf(2.0 / 3.0).ceil() as usize);
    let budget = ((config.delta * m as f64).floor() as usize).max(1);
    let stop = StopRule { threshold, budget };
    let results = per_replicate(config.seed, 0, config.replicates, |_, rng| {
        let graph = sample_graph(&dist, config.d, k, m, rng)?;
        let explorer = Explorer::new(&graph);
        let compartments = graph.lattice().compartments();
        let mut wins = 0usize;
        let mut attempts = 0usize;
        for _ in 0..config.roots {
            let out = explorer.repeated_exploration(rng.random_range(0..compartments), stop, rng)?;
            attempts += out.attempts;
            if out.outcome == Outcome::ReachedThreshold {
                wins += 1;
            }
        }
        Ok((wins, attempts))
    })?;
    let starts = config.roots * results.len();
    let frequency = Estimate::from_counts(results.iter().map(|r| r.0).sum(), starts);
    let survival = if dist.mean() == 0.0 {
        0.0
    } else {
        1.0 - minimal_fixed_point(&dist.offspring()?, DEFAULT_FIXED_POINT_TOL)?
    };
    let bound = if survival > 0.0 && m > 1 {
        let inputs = BoundInputs {
            m: m as f64,
            delta: config.delta,
            beta: config.beta,
            p: survival,
            d: config.d,
            k_exponent: config.bounds.map_or(2.0, |b| b.k_exponent),
            ..BoundInputs::example()
        };
        bound_a_n(&inputs)?
    } else {
        0.0
    };
    Ok(ExplorationRun {
        frequency,
        mean_attempts: results.iter().map(|r| r.1).sum::<usize>() as f64 / starts as f64,
        threshold,
        budget,
        survival,
        bound,
        dominated: frequency.dominates(bound),
    })
}

impl ExplorationRun {
    pub fn output(&self, config: &ScenarioConfig) -> ScenarioOutput {
        let mut t = Table::new(&[
            "starts", "frequency", "std_error", "mean_attempts", "threshold", "budget", "survival",
            "bound_a_n", "dominated",
        ]);
        t.push(vec![
            self.frequency.samples.to_string(),
            self.frequency.value.to_string(),
            self.frequency.std_error.to_string(),
            self.mean_attempts.to_string(),
            self.threshold.to_string(),
            self.budget.to_string(),
            self.survival.to_string(),
            self.bound.to_string(),
            self.dominated.to_string(),
        ]);
        ScenarioOutput::new("explore", config, t)
    }
}
