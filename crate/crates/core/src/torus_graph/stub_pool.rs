use rand::Rng;

use super::TorusLattice;
use crate::degree_model::DegreeSequence;

/// Fenwick tree over nonnegative integer weights: point updates and
/// prefix-sum search in `O(log n)`.
#[derive(Debug, Clone)]
pub struct WeightTree {
    weights: Vec<u64>,
    tree: Vec<u64>,
    mask: usize,
}

impl WeightTree {
    pub fn new(weights: Vec<u64>) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            tree[i + 1] += w;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i + 1];
            }
        }
        let mask = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        WeightTree { weights, tree, mask }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn set(&mut self, i: usize, w: u64) {
        let old = self.weights[i];
        if old == w {
            return;
        }
        self.weights[i] = w;
        let mut idx = i + 1;
        while idx < self.tree.len() {
            self.tree[idx] = self.tree[idx].wrapping_add(w).wrapping_sub(old);
            idx += idx & idx.wrapping_neg();
        }
    }

    pub fn total(&self) -> u64 {
        let mut idx = self.weights.len();
        let mut sum = 0u64;
        while idx > 0 {
            sum += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        sum
    }

    /// Index `i` with `prefix(i) <= target < prefix(i + 1)`; requires
    /// `target < total()`.
    pub fn find(&self, mut target: u64) -> usize {
        let mut pos = 0usize;
        let mut step = self.mask;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }
}

/// Free half-edges per compartment together with the number of allowed stub
/// pairs for every unordered adjacent compartment pair `{i, j}`.
///
/// The pair count is `s_i (s_i - 1) / 2` for `i = j` and `s_i s_j` otherwise.
#[derive(Debug, Clone)]
pub struct StubPool {
    lattice: TorusLattice,
    stubs: Vec<Vec<usize>>,
    buckets: Vec<(usize, usize)>,
    buckets_of: Vec<Vec<usize>>,
    tree: WeightTree,
}

impl StubPool {
    pub fn new(seq: &DegreeSequence) -> Self {
        let lattice = *seq.lattice();
        let m = seq.m();
        let count = lattice.compartments();
        let stubs: Vec<Vec<usize>> = (0..count)
            .map(|i| {
                let mut list = Vec::new();
                for (offset, &deg) in seq.compartment(i).iter().enumerate() {
                    list.extend(std::iter::repeat_n(i * m + offset, deg as usize));
                }
                list
            })
            .collect();
        let mut buckets = Vec::new();
        let mut buckets_of = vec![Vec::new(); count];
        for i in 0..count {
            for j in lattice.neighbors(i) {
                if j >= i {
                    let b = buckets.len();
                    buckets.push((i, j));
                    buckets_of[i].push(b);
                    if j != i {
                        buckets_of[j].push(b);
                    }
                }
            }
        }
        let weights = buckets
            .iter()
            .map(|&(i, j)| pair_weight(stubs[i].len(), stubs[j].len(), i == j))
            .collect();
        StubPool {
            lattice,
            stubs,
            buckets,
            buckets_of,
            tree: WeightTree::new(weights),
        }
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    /// Free half-edges in compartment `i`.
    pub fn free(&self, i: usize) -> usize {
        self.stubs[i].len()
    }

    /// Unordered compartment pairs `(i, j)` with `i <= j`, one per bucket.
    pub fn buckets(&self) -> &[(usize, usize)] {
        &self.buckets
    }

    /// Incrementally maintained pair counts, one per bucket.
    pub fn pair_counts(&self) -> Vec<u64> {
        (0..self.buckets.len()).map(|b| self.tree.weight(b)).collect()
    }

    /// Pair counts recomputed from the free-stub counts.
    pub fn recompute_pair_counts(&self) -> Vec<u64> {
        self.buckets
            .iter()
            .map(|&(i, j)| pair_weight(self.free(i), self.free(j), i == j))
            .collect()
    }

    /// Total number of currently allowed stub pairs.
    pub fn total_pairs(&self) -> u64 {
        self.tree.total()
    }

    /// Matches one pair of half-edges drawn uniformly among all allowed
    /// pairs and returns its endpoints, or `None` when no pair is allowed.
    pub fn match_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(usize, usize)> {
        let total = self.tree.total();
        if total == 0 {
            return None;
        }
        let bucket = self.tree.find(rng.random_range(0..total));
        let (i, j) = self.buckets[bucket];
        let edge = if i == j {
            let s = self.stubs[i].len();
            let a = rng.random_range(0..s);
            let mut b = rng.random_range(0..s - 1);
            if b >= a {
                b += 1;
            }
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            let u = self.stubs[i].swap_remove(hi);
            let v = self.stubs[i].swap_remove(lo);
            (u, v)
        } else {
            let a = rng.random_range(0..self.stubs[i].len());
            let b = rng.random_range(0..self.stubs[j].len());
            (self.stubs[i].swap_remove(a), self.stubs[j].swap_remove(b))
        };
        self.refresh(i);
        if j != i {
            self.refresh(j);
        }
        Some(edge)
    }

    fn refresh(&mut self, c: usize) {
        for &b in &self.buckets_of[c] {
            let (i, j) = self.buckets[b];
            self.tree
                .set(b, pair_weight(self.stubs[i].len(), self.stubs[j].len(), i == j));
        }
    }
}

fn pair_weight(si: usize, sj: usize, same: bool) -> u64 {
    if same {
        (si as u64) * (si as u64).saturating_sub(1) / 2
    } else {
        si as u64 * sj as u64
    }
}
