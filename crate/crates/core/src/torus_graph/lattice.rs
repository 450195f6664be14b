use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The compartment lattice `[k]^d` with wrap-around. Compartment ids are
/// row-major with the first coordinate varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusLattice {
    d: usize,
    k: usize,
}

impl TorusLattice {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "lattice needs d >= 1 and k >= 1, got d = {d}, k = {k}"
            )));
        }
        let count = (k as u128).checked_pow(d as u32);
        match count {
            Some(c) if c <= u32::MAX as u128 => Ok(TorusLattice { d, k }),
            _ => Err(Error::InvalidParameter(format!("k^d too large for d = {d}, k = {k}"))),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of compartments, `k^d`.
    pub fn compartments(&self) -> usize {
        self.k.pow(self.d as u32)
    }

    pub fn coords(&self, mut id: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        for slot in c.iter_mut().rev() {
            *slot = id % self.k;
            id /= self.k;
        }
        c
    }

    pub fn id(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &x| acc * self.k + x % self.k)
    }

    /// Closed neighborhood `{ j : |i - j|_1 <= 1 }` (mod k), deduplicated and
    /// sorted. Contains `i` itself.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let coords = self.coords(i);
        let mut out = Vec::with_capacity(2 * self.d + 1);
        out.push(i);
        let mut c = coords.clone();
        for axis in 0..self.d {
            let x = coords[axis];
            c[axis] = (x + 1) % self.k;
            out.push(self.id(&c));
            c[axis] = (x + self.k - 1) % self.k;
            out.push(self.id(&c));
            c[axis] = x;
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        let a = self.coords(i);
        let b = self.coords(j);
        let mut dist = 0;
        for (x, y) in a.iter().zip(&b) {
            let diff = x.abs_diff(*y);
            dist += diff.min(self.k - diff);
            if dist > 1 {
                return false;
            }
        }
        dist <= 1
    }
}
