//! McDiarmid bounded-difference inequalities and an empirical tail checker.

use rand::Rng;
use serde::Serialize;

use crate::branching::Estimate;
use crate::error::{Error, Result};

/// Bounded-difference constants `c_1..c_n` of a function of `n` independent
/// inputs with values in `R^{d_out}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedDifferenceSpec {
    c: Vec<f64>,
    d_out: usize,
}

impl BoundedDifferenceSpec {
    pub fn new(c: Vec<f64>, d_out: usize) -> Result<Self> {
        if c.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !c.iter().any(|&x| x > 0.0) {
            return Err(Error::InvalidParameter("constants must be nonnegative with one positive".into()));
        }
        if d_out == 0 {
            return Err(Error::InvalidParameter("output dimension must be positive".into()));
        }
        Ok(BoundedDifferenceSpec { c, d_out })
    }

    /// `n` equal constants.
    pub fn uniform(c: f64, n: usize, d_out: usize) -> Result<Self> {
        Self::new(vec![c; n], d_out)
    }

    pub fn constants(&self) -> &[f64] {
        &self.c
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }
}

/// `min(1, 2 d_out exp(-eps^2 / (2 sum c_i^2)))`.
pub fn mcdiarmid_bound(spec: &BoundedDifferenceSpec, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let tail = 2.0 * spec.d_out as f64 * (-epsilon * epsilon / (2.0 * spec.sum_of_squares())).exp();
    Ok(tail.min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    /// Fraction of replicates with max-norm deviation at least `epsilon`.
    pub frequency: Estimate,
    pub bound: f64,
    /// Empirical mean from the calibration run, used in place of `E(F)`.
    pub calibration_mean: Vec<f64>,
    /// Largest standard error of the calibration mean over coordinates: the
    /// scale of the bias introduced by centering at an estimate.
    pub calibration_error: f64,
    pub dominated: bool,
}

/// Estimates `P(|F - E F|_max >= epsilon)` for `F = sampler(rng)`, with
/// `E F` replaced by the mean of `10 * replicates` calibration draws.
///
/// The caller certifies `spec` for the sampler.
pub fn empirical_tail_check<R, F>(
    mut sampler: F,
    spec: &BoundedDifferenceSpec,
    epsilon: f64,
    replicates: usize,
    rng: &mut R,
) -> Result<TailReport>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Vec<f64>,
{
    let bound = mcdiarmid_bound(spec, epsilon)?;
    if replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    let d = spec.d_out;
    let calibration = 10 * replicates;
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    for _ in 0..calibration {
        let x = sampler(rng);
        if x.len() != d {
            return Err(Error::InvalidParameter(format!("sampler returned {} values, expected {d}", x.len())));
        }
        for j in 0..d {
            sum[j] += x[j];
            sum_sq[j] += x[j] * x[j];
        }
    }
    let n = calibration as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let calibration_error = (0..d)
        .map(|j| ((sum_sq[j] / n - mean[j] * mean[j]).max(0.0) / n).sqrt())
        .fold(0.0, f64::max);
    let mut exceed = 0;
    for _ in 0..replicates {
        let x = sampler(rng);
        if x.len() != d {
            return Err(Error::InvalidParameter(format!("sampler returned {} values, expected {d}", x.len())));
        }
        let dev = x.iter().zip(&mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if dev >= epsilon {
            exceed += 1;
        }
    }
    let frequency = Estimate::from_counts(exceed, replicates);
    Ok(TailReport {
        frequency,
        bound,
        calibration_mean: mean,
        calibration_error,
        dominated: frequency.below(bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn bound_examples() {
        let scalar = BoundedDifferenceSpec::uniform(1.0, 10, 1).unwrap();
        assert!((mcdiarmid_bound(&scalar, 10.0).unwrap() - 2.0 * (-5.0f64).exp()).abs() < 1e-15);
        let vector = BoundedDifferenceSpec::uniform(1.0, 10, 3).unwrap();
        assert!((mcdiarmid_bound(&vector, 10.0).unwrap() - 6.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert_eq!(mcdiarmid_bound(&scalar, 1e-9).unwrap(), 1.0);
        assert!(mcdiarmid_bound(&scalar, 0.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BoundedDifferenceSpec::new(vec![0.0, 0.0], 1).is_err());
        assert!(BoundedDifferenceSpec::new(vec![1.0, -1.0], 1).is_err());
        assert!(BoundedDifferenceSpec::new(vec![1.0], 0).is_err());
        assert!(BoundedDifferenceSpec::new(vec![0.0, 2.0], 1).is_ok());
    }

    #[test]
    fn monotone_on_grid() {
        for c in [0.5, 1.0, 2.0] {
            let spec = BoundedDifferenceSpec::uniform(c, 20, 2).unwrap();
            let wider = BoundedDifferenceSpec::uniform(c * 1.5, 20, 2).unwrap();
            let mut last = f64::INFINITY;
            for i in 1..60 {
                let eps = i as f64 * 0.5;
                let b = mcdiarmid_bound(&spec, eps).unwrap();
                assert!(b <= last);
                assert!(b <= mcdiarmid_bound(&wider, eps).unwrap());
                last = b;
            }
        }
    }

    #[test]
    fn constant_function_never_deviates() {
        let spec = BoundedDifferenceSpec::uniform(1.0, 5, 1).unwrap();
        let mut r = rng::master(1);
        let rep = empirical_tail_check(|_: &mut rng::SimRng| vec![3.0], &spec, 0.1, 500, &mut r).unwrap();
        assert_eq!(rep.frequency.value, 0.0);
        assert!(rep.dominated);
    }

    #[test]
    fn coin_sum_tail() {
        let n = 100;
        let spec = BoundedDifferenceSpec::uniform(2.0, n, 1).unwrap();
        let mut r = rng::master(2);
        let coins = |rng: &mut rng::SimRng| {
            let s: i64 = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).sum();
            vec![s as f64]
        };
        let eps = 2.0 * (n as f64).sqrt();
        let rep = empirical_tail_check(coins, &spec, eps, 4000, &mut r).unwrap();
        // 2 exp(-1/2) > 1, so the bound clamps
        assert_eq!(rep.bound, 1.0);
        // P(|S| >= 20) for 100 fair coins is about 0.057 (0.046 by the CLT)
        assert!((rep.frequency.value - 0.05).abs() < 0.02, "{rep:?}");
        assert!(rep.dominated);

        let eps = 2.0 * (2.0 * n as f64).sqrt();
        let rep = empirical_tail_check(coins, &spec, eps, 4000, &mut r).unwrap();
        assert!((rep.bound - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!(rep.frequency.value < 0.02);
        assert!(rep.dominated);
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        let spec = BoundedDifferenceSpec::uniform(1.0, 5, 2).unwrap();
        let mut r = rng::master(3);
        assert!(empirical_tail_check(|_: &mut rng::SimRng| vec![0.0], &spec, 1.0, 10, &mut r).is_err());
    }
}
