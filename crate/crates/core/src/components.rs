//! Connected components of a generated multigraph and the structural
//! quantities built on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus_graph::{MultiGraph, TorusLattice};

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Component labels for every vertex. Component `0` is the largest; ids are
/// ordered by decreasing size, ties broken by smallest member vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl ComponentReport {
    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sizes sorted descending; `sizes()[c]` is the size of component `c`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn second_largest(&self) -> usize {
        self.sizes.get(1).copied().unwrap_or(0)
    }

    pub fn component_size_of(&self, v: usize) -> usize {
        self.sizes[self.labels[v]]
    }

    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == component).collect()
    }
}

pub fn connected_components(graph: &MultiGraph) -> ComponentReport {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    for &(u, v) in graph.edges() {
        uf.union(u, v);
    }
    // roots in order of first appearance, which is the smallest member
    let mut root_slot = vec![usize::MAX; n];
    let mut raw_sizes = Vec::new();
    let mut raw_labels = Vec::with_capacity(n);
    for v in 0..n {
        let r = uf.find(v);
        if root_slot[r] == usize::MAX {
            root_slot[r] = raw_sizes.len();
            raw_sizes.push(0usize);
        }
        raw_sizes[root_slot[r]] += 1;
        raw_labels.push(root_slot[r]);
    }
    let mut order: Vec<usize> = (0..raw_sizes.len()).collect();
    order.sort_by(|&a, &b| raw_sizes[b].cmp(&raw_sizes[a]).then(a.cmp(&b)));
    let mut rank = vec![0usize; order.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    ComponentReport {
        labels: raw_labels.into_iter().map(|l| rank[l]).collect(),
        sizes: order.iter().map(|&old| raw_sizes[old]).collect(),
    }
}

/// `|C ∩ C_i|` for every compartment `i`.
pub fn compartment_spread(
    report: &ComponentReport,
    component: usize,
    lattice: &TorusLattice,
    m: usize,
) -> Vec<usize> {
    let mut counts = vec![0usize; lattice.compartments()];
    for (v, &label) in report.labels().iter().enumerate() {
        if label == component {
            counts[v / m] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusReport {
    pub beta: f64,
    pub threshold: f64,
    pub census_size: usize,
    pub matches_l1: bool,
}

/// The vertex set `{x : |C_x| >= beta ln m}` and whether it is exactly the
/// largest component.
pub fn census(report: &ComponentReport, beta: f64, m: usize) -> Result<CensusReport> {
    if !(beta > 0.0) || m < 2 {
        return Err(Error::InvalidParameter(format!("census needs beta > 0 and m >= 2 (beta = {beta}, m = {m})")));
    }
    let threshold = beta * (m as f64).ln();
    let above: Vec<usize> = report
        .sizes()
        .iter()
        .copied()
        .filter(|&s| s as f64 >= threshold)
        .collect();
    let census_size = above.iter().sum();
    // sizes are sorted, so a lone qualifying component is component 0
    let matches_l1 = above.len() == 1;
    Ok(CensusReport { beta, threshold, census_size, matches_l1 })
}

fn require_circle(graph: &MultiGraph) -> Result<()> {
    match graph.lattice().d() {
        1 => Ok(()),
        d => Err(Error::DimensionMismatch(d)),
    }
}

/// Compartments on the circle whose vertices all have prescribed degree at
/// most 1. No component can pass through such a compartment.
pub fn blocking_compartments(graph: &MultiGraph) -> Result<Vec<usize>> {
    require_circle(graph)?;
    let seq = graph.prescribed();
    Ok((0..graph.lattice().compartments())
        .filter(|&i| seq.compartment(i).iter().all(|&deg| deg <= 1))
        .collect())
}

/// Largest number of consecutive non-blocking compartments between two
/// blocking ones, going around the circle. `None` without blockers.
pub fn max_blocking_gap(graph: &MultiGraph) -> Result<Option<usize>> {
    let blockers = blocking_compartments(graph)?;
    let k = graph.lattice().k();
    if blockers.is_empty() {
        return Ok(None);
    }
    let mut gap = 0;
    for (idx, &b) in blockers.iter().enumerate() {
        let next = blockers[(idx + 1) % blockers.len()];
        let between = (next + k - b - 1) % k;
        let between = if blockers.len() == 1 { k - 1 } else { between };
        gap = gap.max(between);
    }
    Ok(Some(gap))
}

/// Checks that no component's minimal covering arc has a blocking
/// compartment strictly inside it. Arc endpoints are allowed to be blocking.
pub fn span_check(graph: &MultiGraph, report: &ComponentReport) -> Result<bool> {
    require_circle(graph)?;
    let k = graph.lattice().k();
    let m = graph.m();
    let mut blocking = vec![false; k];
    for b in blocking_compartments(graph)? {
        blocking[b] = true;
    }
    let arcs = BlockerArcs::new(&blocking);
    let mut occupied: Vec<Vec<usize>> = vec![Vec::new(); report.component_count()];
    for v in 0..graph.vertex_count() {
        let list = &mut occupied[report.label(v)];
        // vertex ids are compartment-major, so each list comes out sorted
        let c = v / m;
        if list.last() != Some(&c) {
            list.push(c);
        }
    }
    Ok(occupied.iter().all(|list| arcs.clear(list)))
}

/// Blocker counts over arcs of the circle.
struct BlockerArcs {
    k: usize,
    // prefix[i] = blockers among positions 0..i of the doubled circle
    prefix: Vec<usize>,
}

impl BlockerArcs {
    fn new(blocking: &[bool]) -> Self {
        let k = blocking.len();
        let mut prefix = vec![0usize; 2 * k + 1];
        for i in 0..2 * k {
            prefix[i + 1] = prefix[i] + blocking[i % k] as usize;
        }
        BlockerArcs { k, prefix }
    }

    /// Blockers strictly inside the arc of `len` compartments starting at `start`.
    fn interior(&self, start: usize, len: usize) -> usize {
        if len <= 2 {
            0
        } else {
            self.prefix[start + len - 1] - self.prefix[start + 1]
        }
    }

    /// `occupied` is sorted and deduplicated. Among the minimal arcs covering
    /// it (one per widest gap), true if some arc has a blocker-free interior.
    fn clear(&self, occupied: &[usize]) -> bool {
        let t = occupied.len();
        if t <= 1 {
            return true;
        }
        let k = self.k;
        let gaps: Vec<usize> = (0..t)
            .map(|j| (occupied[(j + 1) % t] + k - occupied[j] - 1) % k)
            .collect();
        let widest = *gaps.iter().max().expect("nonempty");
        let len = k - widest;
        (0..t)
            .filter(|&j| gaps[j] == widest)
            .any(|j| self.interior(occupied[(j + 1) % t], len) == 0)
    }
}

/// One summary row per analyzed graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub n: usize,
    pub l1: usize,
    pub l2: usize,
    pub census_size: usize,
    pub matches_l1: bool,
    pub spread_min: usize,
    pub spread_max: usize,
}

pub fn summarize(graph: &MultiGraph, report: &ComponentReport, beta: f64) -> Result<ComponentSummary> {
    let c = census(report, beta, graph.m().max(2))?;
    let spread = compartment_spread(report, 0, graph.lattice(), graph.m());
    Ok(ComponentSummary {
        n: graph.vertex_count(),
        l1: report.largest(),
        l2: report.second_largest(),
        census_size: c.census_size,
        matches_l1: c.matches_l1,
        spread_min: spread.iter().copied().min().unwrap_or(0),
        spread_max: spread.iter().copied().max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_model::{sample_degree_sequence, DegreeDistribution, DegreeSequence};
    use crate::rng;
    use crate::torus_graph::generate;
    use rand::Rng;

    fn graph(d: usize, k: usize, m: usize, degrees: Vec<u32>, edges: Vec<(usize, usize)>) -> MultiGraph {
        let lattice = TorusLattice::new(d, k).unwrap();
        let seq = DegreeSequence::new(degrees, lattice, m).unwrap();
        MultiGraph::from_parts(seq, edges, vec![0; lattice.compartments()]).unwrap()
    }

    #[test]
    fn empty_and_cycle() {
        let g = graph(1, 3, 2, vec![0; 6], vec![]);
        let r = connected_components(&g);
        assert_eq!(r.sizes(), &[1; 6]);
        assert_eq!(r.largest(), 1);

        let cycle: Vec<_> = (0..6).map(|v| (v, (v + 1) % 6)).collect();
        // 0-1 and 4-5 cross compartment 0/1 and 2/0 boundaries; all adjacent at k = 3
        let g = graph(1, 3, 2, vec![2; 6], cycle);
        let r = connected_components(&g);
        assert_eq!(r.sizes(), &[6]);
    }

    #[test]
    fn hand_checked_fixture() {
        let g = graph(1, 3, 2, vec![1, 1, 1, 1, 0, 0], vec![(0, 1), (2, 3)]);
        let r = connected_components(&g);
        assert_eq!(r.sizes(), &[2, 2, 1, 1]);
        assert_eq!(r.largest(), 2);
        assert_eq!(r.second_largest(), 2);
        assert_eq!(r.members(0), vec![0, 1]);
    }

    #[test]
    fn spread_examples() {
        let g = graph(1, 4, 3, vec![0; 12], vec![]);
        let r = connected_components(&g);
        let s = compartment_spread(&r, r.label(7), g.lattice(), 3);
        assert_eq!(s, vec![0, 0, 1, 0]);

        let ring: Vec<_> = (0..12).map(|v| (v, (v + 1) % 12)).collect();
        let g = graph(1, 4, 3, vec![2; 12], ring);
        let r = connected_components(&g);
        assert_eq!(compartment_spread(&r, 0, g.lattice(), 3), vec![3, 3, 3, 3]);
    }

    #[test]
    fn census_examples() {
        let g = graph(1, 4, 3, vec![0; 12], vec![]);
        let r = connected_components(&g);
        let c = census(&r, 10.0, 3).unwrap();
        assert_eq!(c.census_size, 0);
        assert!(!c.matches_l1);

        let ring: Vec<_> = (0..12).map(|v| (v, (v + 1) % 12)).collect();
        let g = graph(1, 4, 3, vec![2; 12], ring);
        let r = connected_components(&g);
        let c = census(&r, 1.0, 3).unwrap();
        assert_eq!(c.census_size, 12);
        assert!(c.matches_l1);

        // beta ln m > n gives an empty census; beta ln m < 1 takes everything
        let c = census(&r, 100.0, 3).unwrap();
        assert_eq!(c.census_size, 0);
        let g = graph(1, 4, 3, vec![0; 12], vec![]);
        let r = connected_components(&g);
        assert_eq!(census(&r, 0.5, 3).unwrap().census_size, 12);
        assert!(census(&r, 0.0, 3).is_err());
    }

    #[test]
    fn blocking_fixture() {
        // k = 5, two vertices per compartment
        let degrees = vec![0, 1, 3, 3, 1, 1, 3, 0, 2, 2];
        let g = graph(1, 5, 2, degrees, vec![]);
        assert_eq!(blocking_compartments(&g).unwrap(), vec![0, 2]);
        assert_eq!(max_blocking_gap(&g).unwrap(), Some(2));

        let all_two = graph(1, 5, 2, vec![2; 10], vec![]);
        assert!(blocking_compartments(&all_two).unwrap().is_empty());
        let zeros = graph(1, 5, 2, vec![0; 10], vec![]);
        assert_eq!(blocking_compartments(&zeros).unwrap(), vec![0, 1, 2, 3, 4]);

        let square = graph(2, 2, 1, vec![0; 4], vec![]);
        assert!(matches!(blocking_compartments(&square), Err(Error::DimensionMismatch(2))));
        let r = connected_components(&square);
        assert!(span_check(&square, &r).is_err());
    }

    #[test]
    fn arc_interior_logic() {
        let mut blocking = vec![false; 7];
        blocking[3] = true;
        let arcs = BlockerArcs::new(&blocking);
        assert!(arcs.clear(&[1, 2]));
        assert!(arcs.clear(&[2, 3]));
        assert!(arcs.clear(&[3, 4, 5]));
        // 2..4 has the blocker strictly inside
        assert!(!arcs.clear(&[2, 4]));
        assert!(!arcs.clear(&[1, 2, 3, 4]));
        // wrap-around arc 5, 6, 0, 1 avoids compartment 3
        assert!(arcs.clear(&[0, 1, 5, 6]));
        // full circle: choose the arc starting right after the blocker
        assert!(arcs.clear(&[0, 1, 2, 3, 4, 5, 6]));
        blocking[0] = true;
        let arcs = BlockerArcs::new(&blocking);
        assert!(!arcs.clear(&[0, 1, 2, 3, 4, 5, 6]));
        assert!(BlockerArcs::new(&[false; 4]).clear(&[0, 2]));
    }

    #[test]
    fn span_check_holds_on_random_circles() {
        let mut r = rng::master(21);
        let dist = DegreeDistribution::from_masses(vec![0.3, 0.2, 0.2, 0.3]).unwrap();
        for _ in 0..500 {
            let k = r.random_range(1..9);
            let m = r.random_range(1..4);
            let lattice = TorusLattice::new(1, k).unwrap();
            let seq = sample_degree_sequence(&dist, lattice, m, &mut r).unwrap();
            let g = generate(&seq, &mut r);
            let rep = connected_components(&g);
            assert!(span_check(&g, &rep).unwrap());
            if let Some(gap) = max_blocking_gap(&g).unwrap() {
                if blocking_compartments(&g).unwrap().len() >= 2 {
                    assert!(rep.largest() <= m * (gap + 2));
                }
            }
        }
    }

    #[test]
    fn sizes_ignore_loops_and_parallel_edges() {
        let mut r = rng::master(22);
        let dist = DegreeDistribution::from_masses(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let lattice = TorusLattice::new(2, 3).unwrap();
        for _ in 0..50 {
            let seq = sample_degree_sequence(&dist, lattice, 4, &mut r).unwrap();
            let g = generate(&seq, &mut r);
            let mut simple: Vec<_> = g
                .edges()
                .iter()
                .filter(|(u, v)| u != v)
                .map(|&(u, v)| (u.min(v), u.max(v)))
                .collect();
            simple.sort_unstable();
            simple.dedup();
            let h = MultiGraph::from_parts(seq.clone(), simple, g.leftover().to_vec()).unwrap();
            assert_eq!(connected_components(&g), connected_components(&h));
        }
    }

}
