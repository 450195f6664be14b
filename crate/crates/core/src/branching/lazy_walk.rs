use crate::error::{Error, Result};

/// Largest table `lazy_walk_pmf` will allocate.
pub const MAX_TABLE_ENTRIES: u128 = 100_000_000;

/// Exact law of `S_n`, the sum of `n` i.i.d. steps uniform on
/// `{0, ±e_1, ..., ±e_d}`, tabulated on the box `[-n, n]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyWalkPmf {
    d: usize,
    n: usize,
    side: usize,
    table: Vec<f64>,
}

impl LazyWalkPmf {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    fn index(&self, v: &[i64]) -> Option<usize> {
        let n = self.n as i64;
        let mut idx = 0usize;
        for &x in v {
            if x < -n || x > n {
                return None;
            }
            idx = idx * self.side + (x + n) as usize;
        }
        Some(idx)
    }

    /// `P(S_n = v)`; zero outside the box.
    pub fn prob(&self, v: &[i64]) -> f64 {
        assert_eq!(v.len(), self.d, "point has wrong dimension");
        self.index(v).map_or(0.0, |i| self.table[i])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Every point of the box with its probability.
    pub fn points(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        let n = self.n as i64;
        let side = self.side;
        let d = self.d;
        self.table.iter().enumerate().map(move |(mut idx, &p)| {
            let mut v = vec![0i64; d];
            for slot in v.iter_mut().rev() {
                *slot = (idx % side) as i64 - n;
                idx /= side;
            }
            (v, p)
        })
    }
}

/// Dynamic-programming convolution of the lazy step law.
///
/// Each update adds `P(x + e_j) + P(x - e_j)` per axis as a pair, then adds
/// the per-axis pairs in sorted order, so the table is exactly invariant
/// under sign flips and coordinate permutations.
pub fn lazy_walk_pmf(n: usize, d: usize) -> Result<LazyWalkPmf> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let side = 2 * n + 1;
    let entries = (side as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::TableTooLarge(entries));
    }
    let entries = entries as usize;
    let mut strides = vec![1usize; d];
    for axis in (0..d.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * side;
    }
    let mut table = vec![0.0f64; entries];
    let center: usize = strides.iter().map(|s| s * n).sum();
    table[center] = 1.0;
    let weight = 1.0 / (2 * d + 1) as f64;
    let mut next = vec![0.0f64; entries];
    let mut pairs = vec![0.0f64; d];
    let mut coord = vec![0usize; d];
    for _ in 0..n {
        coord.iter_mut().for_each(|c| *c = 0);
        for idx in 0..entries {
            for axis in 0..d {
                let s = strides[axis];
                let up = if coord[axis] + 1 < side { table[idx + s] } else { 0.0 };
                let down = if coord[axis] > 0 { table[idx - s] } else { 0.0 };
                pairs[axis] = up + down;
            }
            pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let spread = pairs.iter().fold(0.0, |acc, p| acc + p);
            next[idx] = (table[idx] + spread) * weight;
            // advance the mixed-radix coordinate
            for axis in (0..d).rev() {
                coord[axis] += 1;
                if coord[axis] < side {
                    break;
                }
                coord[axis] = 0;
            }
        }
        std::mem::swap(&mut table, &mut next);
    }
    Ok(LazyWalkPmf { d, n, side, table })
}

/// `min_{|v|_1 <= r} P(S_n = v) / P(S_n = 0)`.
pub fn ratio_check(pmf: &LazyWalkPmf, r: usize) -> Result<f64> {
    if r > pmf.n {
        return Err(Error::InvalidParameter(format!("radius {r} exceeds step count {}", pmf.n)));
    }
    let origin = pmf.prob(&vec![0; pmf.d]);
    let r = r as i64;
    Ok(pmf
        .points()
        .filter(|(v, _)| v.iter().map(|x| x.abs()).sum::<i64>() <= r)
        .map(|(_, p)| p / origin)
        .fold(f64::INFINITY, f64::min))
}
