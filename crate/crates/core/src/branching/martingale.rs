use rand::Rng;
use serde::Serialize;

use super::{dominated::IntegerPmf, sum_of_draws, Estimate};
use crate::error::{Error, Result};

fn check_conditions(x: &IntegerPmf) -> Result<()> {
    if x.min() < -1 || x.prob(-1) <= 0.0 {
        return Err(Error::Domain("need X >= -1 with P(X = -1) > 0".into()));
    }
    if x.mean() <= 0.0 {
        return Err(Error::Domain(format!("need E(X) > 0, got {}", x.mean())));
    }
    Ok(())
}

/// `E(exp(-lambda X)) - 1`.
fn excess(x: &IntegerPmf, lambda: f64) -> f64 {
    x.support().map(|(v, p)| p * (-lambda * v as f64).exp()).sum::<f64>() - 1.0
}

/// The positive root `lambda` of `E(exp(-lambda X)) = 1`.
///
/// The excess is convex with a zero at the origin and negative slope there,
/// so it is negative below the root and positive above it; the bracket is
/// doubled until it straddles the root, then bisected.
pub fn martingale_rate(x: &IntegerPmf, tol: f64) -> Result<f64> {
    check_conditions(x)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let mut hi = 1.0;
    while excess(x, hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence(0));
        }
    }
    let mut lo = 0.0;
    for iter in 0..10_000 {
        let mid = 0.5 * (lo + hi);
        let e = excess(x, mid);
        if e.abs() < tol && hi - lo < tol {
            return Ok(mid);
        }
        if e < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * hi {
            return if excess(x, mid).abs() < tol { Ok(mid) } else { Err(Error::NoConvergence(iter)) };
        }
    }
    Err(Error::NoConvergence(10_000))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinReport {
    pub start: u64,
    pub lambda: f64,
    /// Empirical `P(T(x) < inf)`, with survival read as passing `cap`.
    pub frequency: Estimate,
    /// `exp(-lambda x)`.
    pub bound: f64,
    pub dominated: bool,
}

/// Simulates `S_n = S_{n-1} + sum_{j <= S_{n-1}} X_j` from `S_0 = x` and
/// counts absorptions at zero before `S` reaches `cap`.
pub fn ruin_check<R: Rng + ?Sized>(
    x: &IntegerPmf,
    start: u64,
    replicates: usize,
    cap: u64,
    rng: &mut R,
) -> Result<RuinReport> {
    let lambda = martingale_rate(x, 1e-12)?;
    if start == 0 || cap <= start || replicates == 0 {
        return Err(Error::InvalidParameter("need 0 < x < cap and replicates >= 1".into()));
    }
    // X + 1 is a nonnegative law, so one generation is a sum of draws minus S.
    let lifted = x.shifted(1);
    debug_assert_eq!(lifted.min(), 0);
    let mut ruined = 0;
    for _ in 0..replicates {
        let mut s = start;
        while s > 0 && s < cap {
            s = sum_of_draws(s, lifted.masses(), rng);
        }
        if s == 0 {
            ruined += 1;
        }
    }
    let frequency = Estimate::from_counts(ruined, replicates);
    let bound = (-lambda * start as f64).exp();
    Ok(RuinReport { start, lambda, frequency, bound, dominated: frequency.below(bound) })
}
