//! Compartment lattice, half-edge matching and the resulting multigraph.

mod io;
mod lattice;
mod stub_pool;

use rand::Rng;

pub use io::{
    load_edge_list, read_edge_list, save_edge_list, sidecar_path, write_edge_list, EdgeListSidecar,
};
pub use lattice::TorusLattice;
pub use stub_pool::{StubPool, WeightTree};

use crate::degree_model::DegreeSequence;
use crate::error::{Error, Result};

/// Undirected multigraph on `m k^d` vertices; vertex `v` lives in compartment
/// `v / m`. Self-loops and repeated edges are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    lattice: TorusLattice,
    m: usize,
    edges: Vec<(usize, usize)>,
    prescribed: DegreeSequence,
    realized: Vec<u32>,
    leftover: Vec<u32>,
}

impl MultiGraph {
    /// Assembles a graph from parts, checking locality and degree bounds.
    pub fn from_parts(
        prescribed: DegreeSequence,
        edges: Vec<(usize, usize)>,
        leftover: Vec<u32>,
    ) -> Result<Self> {
        let lattice = *prescribed.lattice();
        let m = prescribed.m();
        let n = prescribed.len();
        if leftover.len() != lattice.compartments() {
            return Err(Error::InvalidParameter(format!(
                "leftover has {} entries, expected {}",
                leftover.len(),
                lattice.compartments()
            )));
        }
        for (row, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::EdgeList {
                    row: row + 1,
                    msg: format!("vertex out of range in ({u}, {v})"),
                });
            }
            if !lattice.adjacent(u / m, v / m) {
                return Err(Error::EdgeList {
                    row: row + 1,
                    msg: format!(
                        "edge ({u}, {v}) joins non-adjacent compartments {} and {}",
                        u / m,
                        v / m
                    ),
                });
            }
        }
        let realized = realized_degrees(n, &edges);
        if let Some(v) = (0..n).find(|&v| realized[v] > prescribed.degrees()[v]) {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} has realized degree {} above prescribed {}",
                realized[v],
                prescribed.degrees()[v]
            )));
        }
        Ok(MultiGraph { lattice, m, edges, prescribed, realized, leftover })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.prescribed.len()
    }

    pub fn compartment_of(&self, v: usize) -> usize {
        v / self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn prescribed(&self) -> &DegreeSequence {
        &self.prescribed
    }

    pub fn realized(&self) -> &[u32] {
        &self.realized
    }

    /// Unmatched half-edges per compartment.
    pub fn leftover(&self) -> &[u32] {
        &self.leftover
    }

    /// Compressed adjacency: for each vertex the list of `(neighbor, edge id)`.
    /// A self-loop appears twice in its vertex's list.
    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self.vertex_count(), &self.edges)
    }
}

fn realized_degrees(n: usize, edges: &[(usize, usize)]) -> Vec<u32> {
    let mut deg = vec![0u32; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    entries: Vec<(usize, usize)>,
}

impl Adjacency {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut entries = vec![(0, 0); offsets[n]];
        for (e, &(u, v)) in edges.iter().enumerate() {
            entries[cursor[u]] = (v, e);
            cursor[u] += 1;
            entries[cursor[v]] = (u, e);
            cursor[v] += 1;
        }
        Adjacency { offsets, entries }
    }

    pub fn of(&self, v: usize) -> &[(usize, usize)] {
        &self.entries[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Runs the matching process on `seq`: repeatedly joins a pair of free
/// half-edges drawn uniformly among all pairs lying in the same or adjacent
/// compartments, until no such pair remains.
pub fn generate<R: Rng + ?Sized>(seq: &DegreeSequence, rng: &mut R) -> MultiGraph {
    let mut pool = StubPool::new(seq);
    let mut edges = Vec::with_capacity((seq.total() / 2) as usize);
    while let Some(edge) = pool.match_step(rng) {
        edges.push(edge);
    }
    let lattice = *seq.lattice();
    let leftover = (0..lattice.compartments()).map(|i| pool.free(i) as u32).collect();
    let realized = realized_degrees(seq.len(), &edges);
    MultiGraph {
        lattice,
        m: seq.m(),
        edges,
        prescribed: seq.clone(),
        realized,
        leftover,
    }
}

/// True when the matching is maximal: at most one leftover stub per
/// compartment and no two adjacent compartments both holding one.
pub fn termination_check(graph: &MultiGraph) -> bool {
    let lattice = graph.lattice();
    let leftover = graph.leftover();
    if leftover.iter().any(|&s| s > 1) {
        return false;
    }
    (0..leftover.len()).filter(|&i| leftover[i] == 1).all(|i| {
        lattice
            .neighbors(i)
            .into_iter()
            .all(|j| j == i || leftover[j] == 0)
    })
}

/// Keeps each edge independently with probability `p_keep`.
pub fn percolate<R: Rng + ?Sized>(graph: &MultiGraph, p_keep: f64, rng: &mut R) -> Result<MultiGraph> {
    if !(0.0..=1.0).contains(&p_keep) {
        return Err(Error::InvalidParameter(format!("p_keep = {p_keep} not in [0,1]")));
    }
    let edges: Vec<_> = graph
        .edges
        .iter()
        .copied()
        .filter(|_| p_keep >= 1.0 || rng.random::<f64>() < p_keep)
        .collect();
    let realized = realized_degrees(graph.vertex_count(), &edges);
    Ok(MultiGraph {
        edges,
        realized,
        ..graph.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_model::{sample_degree_sequence, DegreeDistribution};
    use crate::rng;

    fn seq(d: usize, k: usize, m: usize, degrees: Vec<u32>) -> DegreeSequence {
        DegreeSequence::new(degrees, TorusLattice::new(d, k).unwrap(), m).unwrap()
    }

    #[test]
    fn zero_degrees_give_empty_graph() {
        let g = generate(&seq(1, 3, 2, vec![0; 6]), &mut rng::master(0));
        assert!(g.edges().is_empty());
        assert!(g.leftover().iter().all(|&s| s == 0));
        assert!(termination_check(&g));
    }

    #[test]
    fn single_compartment_matchings() {
        let mut r = rng::master(1);
        for _ in 0..100 {
            let g = generate(&seq(1, 1, 2, vec![1, 1]), &mut r);
            let edges: Vec<_> = g.edges().iter().map(|&e| sort(e)).collect();
            assert_eq!(edges, vec![(0, 1)]);
            assert_eq!(g.leftover(), &[0]);
            let three = generate(&seq(1, 1, 3, vec![1, 1, 1]), &mut r);
            assert_eq!(three.edges().len(), 1);
            assert_eq!(three.leftover(), &[1]);
        }
    }

    fn sort((a, b): (usize, usize)) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    #[test]
    fn termination_examples() {
        let lattice = TorusLattice::new(1, 5).unwrap();
        let prescribed = DegreeSequence::new(vec![1, 0, 1, 0, 0], lattice, 1).unwrap();
        let g = MultiGraph::from_parts(prescribed.clone(), vec![], vec![1, 0, 1, 0, 0]).unwrap();
        assert!(termination_check(&g));
        let adjacent = DegreeSequence::new(vec![1, 1, 0, 0, 0], lattice, 1).unwrap();
        let g = MultiGraph::from_parts(adjacent, vec![], vec![1, 1, 0, 0, 0]).unwrap();
        assert!(!termination_check(&g));
        let two = DegreeSequence::new(vec![2, 0, 0, 0, 0], lattice, 1).unwrap();
        let g = MultiGraph::from_parts(two, vec![], vec![2, 0, 0, 0, 0]).unwrap();
        assert!(!termination_check(&g));
    }

    #[test]
    fn generated_graph_invariants() {
        let mut r = rng::master(9);
        let dist = DegreeDistribution::from_masses(vec![0.2, 0.3, 0.2, 0.3]).unwrap();
        for (d, k, m) in [(1, 1, 7), (1, 2, 5), (1, 7, 5), (2, 2, 4), (2, 4, 3), (3, 3, 2)] {
            let lattice = TorusLattice::new(d, k).unwrap();
            for _ in 0..30 {
                let s = sample_degree_sequence(&dist, lattice, m, &mut r).unwrap();
                let g = generate(&s, &mut r);
                for &(u, v) in g.edges() {
                    assert!(lattice.adjacent(u / m, v / m));
                }
                let leftover: u64 = g.leftover().iter().map(|&x| x as u64).sum();
                assert_eq!(2 * g.edges().len() as u64 + leftover, s.total());
                assert!(termination_check(&g));
                for v in 0..g.vertex_count() {
                    assert!(g.realized()[v] <= s.degrees()[v]);
                }
            }
        }
    }

    #[test]
    fn self_loops_count_twice() {
        let s = seq(1, 1, 1, vec![2]);
        let g = generate(&s, &mut rng::master(0));
        assert_eq!(g.edges(), &[(0, 0)]);
        assert_eq!(g.realized(), &[2]);
    }

    #[test]
    fn percolation_extremes_and_concentration() {
        let dist = DegreeDistribution::point_mass(3);
        let lattice = TorusLattice::new(1, 20).unwrap();
        let mut r = rng::master(4);
        let s = sample_degree_sequence(&dist, lattice, 50, &mut r).unwrap();
        let g = generate(&s, &mut r);
        assert_eq!(percolate(&g, 1.0, &mut r).unwrap(), g);
        let none = percolate(&g, 0.0, &mut r).unwrap();
        assert!(none.edges().is_empty());
        assert!(none.realized().iter().all(|&x| x == 0));
        assert_eq!(none.prescribed(), g.prescribed());

        let e = g.edges().len() as f64;
        let band = 3.0 * (e * 0.25).sqrt();
        let inside = (0..200)
            .filter(|_| {
                let kept = percolate(&g, 0.5, &mut r).unwrap().edges().len() as f64;
                (kept - e / 2.0).abs() <= band
            })
            .count();
        assert!(inside >= 198, "{inside}");
        assert!(percolate(&g, 1.5, &mut r).is_err());
    }
}
