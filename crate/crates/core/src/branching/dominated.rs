use serde::Serialize;

use crate::degree_model::DegreeDistribution;
use crate::error::{Error, Result};

/// Finitely supported pmf on the integers `min, min + 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegerPmf {
    min: i64,
    masses: Vec<f64>,
}

impl IntegerPmf {
    pub fn new(min: i64, masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidDistribution("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        let mut pmf = IntegerPmf { min, masses };
        pmf.trim();
        Ok(pmf)
    }

    /// `{value: mass}` pairs, e.g. `[(-1, 0.5), (2, 0.5)]`.
    pub fn from_pairs(pairs: &[(i64, f64)]) -> Result<Self> {
        let min = pairs.iter().map(|p| p.0).min().ok_or_else(|| {
            Error::InvalidDistribution("empty support".into())
        })?;
        let max = pairs.iter().map(|p| p.0).max().expect("nonempty");
        let mut masses = vec![0.0; (max - min + 1) as usize];
        for &(v, p) in pairs {
            masses[(v - min) as usize] += p;
        }
        Self::new(min, masses)
    }

    fn trim(&mut self) {
        while self.masses.len() > 1 && self.masses.last() == Some(&0.0) {
            self.masses.pop();
        }
        let lead = self.masses.iter().take_while(|&&p| p == 0.0).count();
        let lead = lead.min(self.masses.len() - 1);
        self.masses.drain(..lead);
        self.min += lead as i64;
    }

    pub fn min(&self) -> i64 {
        self.min
    }

    pub fn max(&self) -> i64 {
        self.min + self.masses.len() as i64 - 1
    }

    /// Masses of `min, min + 1, ..., max`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn prob(&self, v: i64) -> f64 {
        if v < self.min {
            return 0.0;
        }
        self.masses.get((v - self.min) as usize).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses.iter().enumerate().map(|(i, &p)| (self.min + i as i64, p))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(v, p)| v as f64 * p).sum()
    }

    /// Law of `X + shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        IntegerPmf { min: self.min + shift, masses: self.masses.clone() }
    }
}

impl From<&DegreeDistribution> for IntegerPmf {
    fn from(dist: &DegreeDistribution) -> Self {
        let mut pmf = IntegerPmf { min: 0, masses: dist.masses().to_vec() };
        pmf.trim();
        pmf
    }
}

/// Lower-bounding offspring law of the exploration process:
/// `N = W - 2 Bin(W, gamma)` with `W` the `2 eta`-truncation of the
/// offspring law `q` of `dist`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatedOffspring {
    pub q: DegreeDistribution,
    pub eta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub truncated: DegreeDistribution,
    /// Top support point of the truncated law.
    pub l: usize,
    pub gamma: f64,
    pub n: IntegerPmf,
}

impl DominatedOffspring {
    /// `N = W - 2 Bin(W, gamma)` for a given truncated law and collision
    /// probability; the remaining fields are left at zero.
    pub fn from_truncated(w: &DegreeDistribution, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(DominatedOffspring {
            q: w.clone(),
            eta: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            truncated: w.clone(),
            l: w.max_degree(),
            gamma,
            n: thinned(w, gamma),
        })
    }

    pub fn mean(&self) -> f64 {
        self.n.mean()
    }

    /// `E(W) (1 - 2 gamma)`.
    pub fn predicted_mean(&self) -> f64 {
        self.truncated.mean() * (1.0 - 2.0 * self.gamma)
    }
}

/// Exact pmf of `W - 2 Bin(W, gamma)` by conditioning on `W`.
fn thinned(w: &DegreeDistribution, gamma: f64) -> IntegerPmf {
    let l = w.max_degree() as i64;
    let mut masses = vec![0.0; (2 * l + 1) as usize];
    for (wv, &pw) in w.masses().iter().enumerate() {
        if pw == 0.0 {
            continue;
        }
        for (j, b) in binomial_pmf(wv, gamma).into_iter().enumerate() {
            let value = wv as i64 - 2 * j as i64;
            masses[(value + l) as usize] += pw * b;
        }
    }
    let mut pmf = IntegerPmf { min: -l, masses };
    pmf.trim();
    pmf
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if p == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p == 1.0 {
        out[n] = 1.0;
        return out;
    }
    let mut coef = 1.0f64;
    for (j, slot) in out.iter_mut().enumerate() {
        if j > 0 {
            coef = coef * (n - j + 1) as f64 / j as f64;
        }
        *slot = coef * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
    }
    out
}

pub fn dominated_offspring(
    dist: &DegreeDistribution,
    eta: f64,
    delta: f64,
    epsilon: f64,
) -> Result<DominatedOffspring> {
    if !(0.0..0.5).contains(&eta) || !(delta >= 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need eta in [0, 1/2), delta >= 0, epsilon >= 0; got {eta}, {delta}, {epsilon}"
        )));
    }
    let q = dist.offspring()?;
    let truncated = q.truncated(2.0 * eta)?;
    let l = truncated.max_degree();
    let denom = dist.mean() / 2.0 - epsilon - l as f64 * delta;
    if denom <= 0.0 {
        return Err(Error::InfeasibleDomination(denom));
    }
    let gamma = l as f64 * delta / denom;
    if gamma > 1.0 {
        return Err(Error::InfeasibleDomination(gamma));
    }
    let n = thinned(&truncated, gamma);
    Ok(DominatedOffspring { q, eta, delta, epsilon, truncated, l, gamma, n })
}
