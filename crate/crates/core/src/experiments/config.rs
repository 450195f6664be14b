use serde::{Deserialize, Serialize};

use super::bounds::BoundInputs;
use crate::degree_model::{DegreeDistribution, DistributionLiteral};
use crate::error::{Error, Result};

fn default_d() -> usize {
    1
}

fn default_replicates() -> usize {
    10
}

fn default_beta() -> f64 {
    10.0
}

fn default_l2_beta() -> f64 {
    20.0
}

fn default_roots() -> usize {
    10_000
}

fn default_delta() -> f64 {
    0.1
}

/// One point of an explicit schedule, `n = m k^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

/// JSON scenario description. Only `dist` is required; which of the other
/// fields matter depends on the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    pub dist: DistributionLiteral,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Census and small-component threshold factor: `beta ln m`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Factor of the reported second-component bound `l2_beta ln m`.
    #[serde(default = "default_l2_beta")]
    pub l2_beta: f64,
    /// Explicit `(n, k, m)` schedule for the counterexample.
    #[serde(default)]
    pub schedule: Vec<ScheduleEntry>,
    /// System sizes; with a fixed `m` they expand to a schedule.
    #[serde(default)]
    pub n_values: Vec<usize>,
    /// `m = round(lambda ln n)` for the conjecture scan.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub p_keep: Vec<f64>,
    /// Random roots (extinction) or exploration starts per replicate.
    #[serde(default = "default_roots")]
    pub roots: usize,
    /// Exploration budget as a fraction of `m`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Exploration success threshold; defaults to `ceil(m^{2/3})`.
    #[serde(default)]
    pub threshold: Option<usize>,
    #[serde(default)]
    pub bounds: Option<BoundInputs>,
}

impl ScenarioConfig {
    pub fn new(dist: DistributionLiteral) -> Self {
        ScenarioConfig {
            scenario: None,
            d: default_d(),
            k: None,
            m: None,
            dist,
            replicates: default_replicates(),
            seed: 0,
            beta: default_beta(),
            l2_beta: default_l2_beta(),
            schedule: Vec::new(),
            n_values: Vec::new(),
            lambdas: Vec::new(),
            p_keep: Vec::new(),
            roots: default_roots(),
            delta: default_delta(),
            threshold: None,
            bounds: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn distribution(&self) -> Result<DegreeDistribution> {
        self.dist.build()
    }

    /// Checks the fields every scenario relies on.
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.k == Some(0) || self.m == Some(0) {
            return Err(Error::Config("k and m must be at least 1".into()));
        }
        if !(self.beta > 0.0) || !(self.l2_beta > 0.0) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("delta = {} not in (0, 1]", self.delta)));
        }
        if self.roots == 0 || self.threshold == Some(0) {
            return Err(Error::Config("roots and threshold must be at least 1".into()));
        }
        if let Some(p) = self.p_keep.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("p_keep = {p} not in [0, 1]")));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l > 0.0)) {
            return Err(Error::Config(format!("lambda = {l} must be positive")));
        }
        self.distribution()?;
        for e in &self.schedule {
            check_entry(e, self.d)?;
        }
        Ok(())
    }

    pub fn require_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::Config("k is required".into()))
    }

    pub fn require_m(&self) -> Result<usize> {
        self.m.ok_or_else(|| Error::Config("m is required".into()))
    }

    /// The explicit schedule, or `n_values` expanded with the fixed `m` and
    /// `k = round((n / m)^{1/d})`.
    pub fn resolved_schedule(&self) -> Result<Vec<ScheduleEntry>> {
        if !self.schedule.is_empty() {
            return Ok(self.schedule.clone());
        }
        let m = self.require_m()?;
        if self.n_values.is_empty() {
            return Err(Error::Config("schedule or n_values is required".into()));
        }
        self.n_values
            .iter()
            .map(|&n| {
                let entry = ScheduleEntry { n, k: side_for(n, m, self.d), m };
                check_entry(&entry, self.d)?;
                Ok(entry)
            })
            .collect()
    }

    /// Trends of a schedule that contradict the asymptotic regime: `k` must
    /// grow and `n / m^j` must vanish for some `j`, so `m` must grow as well.
    pub fn schedule_warnings(schedule: &[ScheduleEntry]) -> Vec<String> {
        let mut out = Vec::new();
        if schedule.len() < 2 {
            return out;
        }
        if schedule.windows(2).any(|w| w[1].k <= w[0].k) {
            out.push("k does not increase along the schedule".into());
        }
        if schedule.windows(2).any(|w| w[1].m <= w[0].m) {
            out.push("m does not increase along the schedule, so n / m^j does not vanish".into());
        }
        out
    }
}

/// `round((n / m)^{1/d})`, at least 1.
pub fn side_for(n: usize, m: usize, d: usize) -> usize {
    ((n as f64 / m as f64).powf(1.0 / d as f64).round() as usize).max(1)
}

fn check_entry(e: &ScheduleEntry, d: usize) -> Result<()> {
    if e.k == 0 || e.m == 0 || e.n == 0 {
        return Err(Error::Config(format!("schedule entry {e:?} has a zero field")));
    }
    let exact = (e.n as f64 / e.m as f64).powf(1.0 / d as f64);
    if (e.k as f64 - exact).abs() > 1.0 {
        return Err(Error::Config(format!(
            "schedule entry {e:?}: n is not m k^d up to rounding of k"
        )));
    }
    Ok(())
}
