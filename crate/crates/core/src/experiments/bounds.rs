//! Finite-size lower bounds on the probability that a giant component
//! spreads over every compartment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_k_exponent() -> f64 {
    2.0
}

fn default_side() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    /// Compartment size `m`.
    pub m: f64,
    /// Exponent in the `2 m^{-k}` failure probability of one exploration.
    #[serde(default = "default_k_exponent")]
    pub k_exponent: f64,
    /// Exploration budget fraction.
    pub delta: f64,
    pub beta: f64,
    /// Survival probability of the dominating branching process.
    pub p: f64,
    pub epsilon: f64,
    pub tau: f64,
    /// Constant in the failure probability of joining neighbouring components.
    pub c: f64,
    pub d: usize,
    /// Torus side `k(n)`, used only by the combined bound.
    #[serde(default = "default_side")]
    pub side: f64,
}

impl BoundInputs {
    /// Small desk-scale fixture: `m = 10^4`, `k = 2`, `delta = 0.1`,
    /// `beta = 10`, `p = 2/3`, `epsilon = 0.1`, `tau = 0.1`, `C = 1`, `d = 1`.
    pub fn example() -> Self {
        BoundInputs {
            m: 1e4,
            k_exponent: 2.0,
            delta: 0.1,
            beta: 10.0,
            p: 2.0 / 3.0,
            epsilon: 0.1,
            tau: 0.1,
            c: 1.0,
            d: 1,
            side: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.k_exponent, self.beta, self.epsilon, self.c, self.side];
        if !(self.m > 1.0) || positive.iter().any(|x| !(*x > 0.0)) || self.d == 0 {
            return Err(Error::InvalidParameter(
                "need m > 1 and k, beta, epsilon, C, side, d positive".into(),
            ));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {} must be >= 0", self.delta)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {} not in (0, 1]", self.p)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0 / 6.0) {
            return Err(Error::InvalidParameter(format!("tau = {} not in (0, 1/6]", self.tau)));
        }
        Ok(())
    }
}

/// `(1 - 2 m^{-k})^e (1 - (1 - p)^e)` with `e = delta m / (beta ln m)`,
/// unclamped.
pub fn raw_a_n(i: &BoundInputs) -> f64 {
    let e = i.delta * i.m / (i.beta * i.m.ln());
    let first = (e * (-2.0 * i.m.powf(-i.k_exponent)).ln_1p()).exp();
    let second = -(e * (-i.p).ln_1p()).exp_m1();
    first * second
}

/// `(1 - 2 exp(-eps^2 m^{2/3 - 2 tau} / 8)) (1 - 2 exp(-2 m^{2 tau / d}))`,
/// unclamped.
pub fn raw_b_n(i: &BoundInputs) -> f64 {
    let spread = 1.0 - 2.0 * (-i.epsilon * i.epsilon * i.m.powf(2.0 / 3.0 - 2.0 * i.tau) / 8.0).exp();
    let growth = 1.0 - 2.0 * (-2.0 * i.m.powf(2.0 * i.tau / i.d as f64)).exp();
    spread * growth
}

/// `1 - exp(-C eps^2 m^{1/3 - 2 tau})`.
pub fn raw_c_n(i: &BoundInputs) -> f64 {
    -(-i.c * i.epsilon * i.epsilon * i.m.powf(1.0 / 3.0 - 2.0 * i.tau)).exp_m1()
}

/// Probability that one exploration with budget `delta m` finds a component
/// of size `m^{2/3}`, clamped to `[0, 1]`.
pub fn bound_a_n(i: &BoundInputs) -> Result<f64> {
    i.validate()?;
    Ok(raw_a_n(i).clamp(0.0, 1.0))
}

/// Probability that such a component spreads into the compartment, clamped
/// to `[0, 1]`.
pub fn bound_b_n(i: &BoundInputs) -> Result<f64> {
    i.validate()?;
    Ok(raw_b_n(i).clamp(0.0, 1.0))
}

/// Probability that two neighbouring local components are joined.
pub fn bound_c_n(i: &BoundInputs) -> Result<f64> {
    i.validate()?;
    Ok(raw_c_n(i).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub raw_b_n: f64,
    /// `(1 - k^d (1 - a_n b_n)) (1 - d k c_n)` exactly as written; not
    /// clamped and typically negative, because `c_n` is a success
    /// probability there.
    pub combined: f64,
    /// The same product with the connection failure probability `1 - c_n`
    /// in the second factor.
    pub combined_failure_term: f64,
}

pub fn evaluate_bounds(i: &BoundInputs) -> Result<BoundReport> {
    let a_n = bound_a_n(i)?;
    let b_n = bound_b_n(i)?;
    let c_n = bound_c_n(i)?;
    let d = i.d as f64;
    let cover = 1.0 - i.side.powf(d) * (1.0 - a_n * b_n);
    Ok(BoundReport {
        a_n,
        b_n,
        c_n,
        raw_b_n: raw_b_n(i),
        combined: cover * (1.0 - d * i.side * c_n),
        combined_failure_term: cover * (1.0 - d * i.side * (1.0 - c_n)),
    })
}
