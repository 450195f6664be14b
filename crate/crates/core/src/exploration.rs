//! Generation-synchronous exploration of a component, tracking explored,
//! active and unseen vertices per compartment.
//!
//! Starting from `A_0 = {v}`, each step reveals `A_{l+1}`, the unseen
//! neighbours of the whole active generation, then sets
//! `R_{l+1} = R_l ∪ A_l` and `U_{l+1} = U_l \ A_{l+1}`. An edge is examined
//! once; a vertex reached through an unused edge that is already explored,
//! active, or already revealed in the current generation counts as a
//! collision. Parallel edges between the same pair are examined together.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::torus_graph::{Adjacency, MultiGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Explored,
    Active,
    Revealed,
}

/// A graph prepared for exploration.
#[derive(Debug, Clone)]
pub struct Explorer<'g> {
    graph: &'g MultiGraph,
    adjacency: Adjacency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub active: usize,
    pub exposed: usize,
    pub collisions: usize,
}

#[derive(Debug, Clone)]
pub struct ExplorationState {
    generation: usize,
    status: HashMap<usize, Status>,
    active: Vec<usize>,
    explored_per_compartment: Vec<usize>,
    active_per_compartment: Vec<usize>,
    used_edges: HashSet<usize>,
    exposed: usize,
    collisions: usize,
    history: Vec<GenerationRecord>,
}

impl ExplorationState {
    pub fn generation(&self) -> usize {
        self.generation
    }

    /// `||A_l||`.
    pub fn active_total(&self) -> usize {
        self.active.len()
    }

    /// `|A_l|`, one entry per compartment.
    pub fn active_sizes(&self) -> &[usize] {
        &self.active_per_compartment
    }

    pub fn explored_sizes(&self) -> &[usize] {
        &self.explored_per_compartment
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// `sum_{i <= l} ||A_i||`: every vertex revealed so far.
    pub fn exposed(&self) -> usize {
        self.exposed
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn is_terminated(&self) -> bool {
        self.active.is_empty()
    }

    pub fn history(&self) -> &[GenerationRecord] {
        &self.history
    }

    /// `R_l`, sorted.
    pub fn explored(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .status
            .iter()
            .filter(|(_, s)| **s == Status::Explored)
            .map(|(&v, _)| v)
            .collect();
        out.sort_unstable();
        out
    }

    /// Every vertex revealed so far (`R_l ∪ A_l`), sorted.
    pub fn exposed_vertices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.status.keys().copied().collect();
        out.sort_unstable();
        out
    }

    fn record(&mut self) {
        self.history.push(GenerationRecord {
            generation: self.generation,
            active: self.active.len(),
            exposed: self.exposed,
            collisions: self.collisions,
        });
    }

    /// Recounts `R_l(i)`, `A_l(i)`, `U_l(i)` from vertex labels and checks they
    /// partition every compartment and agree with the maintained counters.
    pub fn check_partition(&self, graph: &MultiGraph) -> bool {
        let c = graph.lattice().compartments();
        let m = graph.m();
        let mut explored = vec![0usize; c];
        let mut active = vec![0usize; c];
        for (&v, &s) in &self.status {
            match s {
                Status::Explored => explored[v / m] += 1,
                Status::Active => active[v / m] += 1,
                Status::Revealed => return false,
            }
        }
        let listed: HashSet<usize> = self.active.iter().copied().collect();
        listed.len() == self.active.len()
            && listed.iter().all(|v| self.status.get(v) == Some(&Status::Active))
            && explored == self.explored_per_compartment
            && active == self.active_per_compartment
            && (0..c).all(|i| explored[i] + active[i] <= m)
            && self.active_per_compartment.iter().sum::<usize>() == self.active.len()
    }
}

impl<'g> Explorer<'g> {
    pub fn new(graph: &'g MultiGraph) -> Self {
        Explorer { graph, adjacency: graph.adjacency() }
    }

    pub fn graph(&self) -> &MultiGraph {
        self.graph
    }

    /// `R_0 = ∅`, `A_0 = {v}`, everything else unseen.
    pub fn start(&self, v: usize) -> Result<ExplorationState> {
        if v >= self.graph.vertex_count() {
            return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
        }
        let c = self.graph.lattice().compartments();
        let mut state = ExplorationState {
            generation: 0,
            status: HashMap::from([(v, Status::Active)]),
            active: vec![v],
            explored_per_compartment: vec![0; c],
            active_per_compartment: vec![0; c],
            used_edges: HashSet::new(),
            exposed: 1,
            collisions: 0,
            history: Vec::new(),
        };
        state.active_per_compartment[self.graph.compartment_of(v)] = 1;
        state.record();
        Ok(state)
    }

    pub fn step(&self, state: &mut ExplorationState) -> Result<()> {
        if state.is_terminated() {
            return Err(Error::Terminated);
        }
        let m = self.graph.m();
        let mut next = Vec::new();
        let mut neighbors = Vec::new();
        for &u in &state.active {
            neighbors.clear();
            for &(w, e) in self.adjacency.of(u) {
                if state.used_edges.insert(e) {
                    neighbors.push(w);
                }
            }
            neighbors.sort_unstable();
            neighbors.dedup();
            for &w in &neighbors {
                match state.status.get(&w) {
                    Some(_) => state.collisions += 1,
                    None => {
                        state.status.insert(w, Status::Revealed);
                        next.push(w);
                    }
                }
            }
        }
        for &u in &state.active {
            state.status.insert(u, Status::Explored);
            state.explored_per_compartment[u / m] += 1;
            state.active_per_compartment[u / m] -= 1;
        }
        for &w in &next {
            state.status.insert(w, Status::Active);
            state.active_per_compartment[w / m] += 1;
        }
        state.exposed += next.len();
        state.active = next;
        state.generation += 1;
        state.record();
        Ok(())
    }

    /// Steps until the active set dies out, the exploration has revealed at
    /// least `stop.threshold` vertices, or more than `stop.budget` vertices
    /// have been exposed.
    pub fn explore_until(&self, v: usize, stop: StopRule) -> Result<(Outcome, ExplorationState)> {
        stop.validate()?;
        let mut state = self.start(v)?;
        let outcome = self.run(&mut state, stop, 0)?;
        Ok((outcome, state))
    }

    fn run(&self, state: &mut ExplorationState, stop: StopRule, spent: usize) -> Result<Outcome> {
        loop {
            self.step(state)?;
            if state.is_terminated() {
                return Ok(Outcome::Died);
            }
            if state.exposed >= stop.threshold {
                return Ok(Outcome::ReachedThreshold);
            }
            if spent + state.exposed > stop.budget {
                return Ok(Outcome::BudgetExhausted);
            }
        }
    }

    /// Restarts at uniformly chosen never-exposed vertices of `compartment`
    /// after each death, sharing the exposure budget across attempts.
    pub fn repeated_exploration<R: Rng + ?Sized>(
        &self,
        compartment: usize,
        stop: StopRule,
        rng: &mut R,
    ) -> Result<RepeatedOutcome> {
        stop.validate()?;
        let m = self.graph.m();
        if compartment >= self.graph.lattice().compartments() {
            return Err(Error::InvalidParameter(format!("compartment {compartment} out of range")));
        }
        let mut candidates: Vec<usize> = (compartment * m..(compartment + 1) * m).collect();
        let mut seen: HashSet<usize> = HashSet::new();
        let mut spent = 0usize;
        let mut attempts = 0usize;
        loop {
            let start = loop {
                if candidates.is_empty() {
                    return Ok(RepeatedOutcome {
                        outcome: Outcome::BudgetExhausted,
                        attempts,
                        exposed: spent,
                    });
                }
                let v = candidates.swap_remove(rng.random_range(0..candidates.len()));
                if !seen.contains(&v) {
                    break v;
                }
            };
            attempts += 1;
            let mut state = self.start(start)?;
            let outcome = self.run(&mut state, stop, spent)?;
            spent += state.exposed;
            match outcome {
                Outcome::Died => {
                    if spent > stop.budget {
                        return Ok(RepeatedOutcome { outcome: Outcome::BudgetExhausted, attempts, exposed: spent });
                    }
                    seen.extend(state.status.keys().copied());
                }
                other => return Ok(RepeatedOutcome { outcome: other, attempts, exposed: spent }),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StopRule {
    /// Stop once this many vertices have been revealed by the current attempt.
    pub threshold: usize,
    /// Stop once more than this many vertices have been exposed in total.
    pub budget: usize,
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        if self.threshold == 0 || self.budget == 0 {
            return Err(Error::InvalidParameter("stop thresholds must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Died,
    ReachedThreshold,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RepeatedOutcome {
    pub outcome: Outcome,
    pub attempts: usize,
    pub exposed: usize,
}

/// Per-generation trace: `l, active, exposed, collisions`.
pub fn write_trace<W: Write>(state: &ExplorationState, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for record in state.history() {
        w.serialize(record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::connected_components;
    use crate::degree_model::{sample_degree_sequence, DegreeDistribution, DegreeSequence};
    use crate::rng;
    use crate::torus_graph::{generate, TorusLattice};

    /// All vertices in one compartment so any edge set is local.
    fn flat(n: usize, edges: Vec<(usize, usize)>) -> MultiGraph {
        let mut deg = vec![0u32; n];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let seq = DegreeSequence::new(deg, TorusLattice::new(1, 1).unwrap(), n).unwrap();
        MultiGraph::from_parts(seq, edges, vec![0]).unwrap()
    }

    fn sizes(state: &ExplorationState) -> Vec<usize> {
        state.history().iter().map(|r| r.active).collect()
    }

    fn run_out(ex: &Explorer, v: usize) -> ExplorationState {
        let mut s = ex.start(v).unwrap();
        while !s.is_terminated() {
            ex.step(&mut s).unwrap();
            assert!(s.check_partition(ex.graph()));
        }
        s
    }

    #[test]
    fn isolated_vertex() {
        let g = flat(3, vec![(1, 2)]);
        let ex = Explorer::new(&g);
        let s = ex.start(0).unwrap();
        assert_eq!(s.active_total(), 1);
        assert_eq!(s.exposed(), 1);
        let s = run_out(&ex, 0);
        assert_eq!(s.generation(), 1);
        let mut s2 = s.clone();
        assert!(matches!(ex.step(&mut s2), Err(Error::Terminated)));
        let (outcome, st) = ex.explore_until(0, StopRule { threshold: 1, budget: 5 }).unwrap();
        assert_eq!(outcome, Outcome::Died);
        assert_eq!(st.exposed(), 1);
    }

    #[test]
    fn triangle_path_star_cycle() {
        let tri = flat(3, vec![(0, 1), (1, 2), (2, 0)]);
        assert_eq!(sizes(&run_out(&Explorer::new(&tri), 0)), vec![1, 2, 0]);

        let path = flat(3, vec![(0, 1), (1, 2)]);
        let s = run_out(&Explorer::new(&path), 0);
        assert_eq!(sizes(&s), vec![1, 1, 1, 0]);
        assert_eq!(s.collisions(), 0);

        let star = flat(6, (1..6).map(|l| (0, l)).collect());
        let s = run_out(&Explorer::new(&star), 0);
        assert_eq!(sizes(&s), vec![1, 5, 0]);
        assert_eq!(s.generation(), 2);

        let square = flat(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        for v in 0..4 {
            let s = run_out(&Explorer::new(&square), v);
            assert_eq!(sizes(&s), vec![1, 2, 1, 0]);
            assert_eq!(s.collisions(), 1);
        }
    }

    #[test]
    fn parallel_edges_and_loops() {
        let g = flat(2, vec![(0, 1), (0, 1), (1, 1)]);
        let s = run_out(&Explorer::new(&g), 0);
        assert_eq!(sizes(&s), vec![1, 1, 0]);
        // the loop at 1 leads back into the active set
        assert_eq!(s.collisions(), 1);
    }

    #[test]
    fn cycle_threshold() {
        let n = 12;
        let cycle = flat(n, (0..n).map(|v| (v, (v + 1) % n)).collect());
        let ex = Explorer::new(&cycle);
        let (o, _) = ex.explore_until(0, StopRule { threshold: n, budget: n }).unwrap();
        assert_eq!(o, Outcome::ReachedThreshold);
        let (o, _) = ex.explore_until(0, StopRule { threshold: n + 1, budget: 2 * n }).unwrap();
        assert_eq!(o, Outcome::Died);
        let (o, s) = ex.explore_until(0, StopRule { threshold: n, budget: 4 }).unwrap();
        assert_eq!(o, Outcome::BudgetExhausted);
        assert!(s.exposed() > 4);
    }

    #[test]
    fn repeated_exploration_edge_cases() {
        let lattice = TorusLattice::new(1, 3).unwrap();
        let seq = DegreeSequence::new(vec![0; 15], lattice, 5).unwrap();
        let g = generate(&seq, &mut rng::master(0));
        let ex = Explorer::new(&g);
        let out = ex
            .repeated_exploration(1, StopRule { threshold: 2, budget: 100 }, &mut rng::master(1))
            .unwrap();
        assert_eq!(out.outcome, Outcome::BudgetExhausted);
        assert_eq!(out.attempts, 5);

        // one cycle through each compartment's vertices
        let m = 6;
        let mut edges = Vec::new();
        for c in 0..3 {
            for j in 0..m {
                edges.push((c * m + j, c * m + (j + 1) % m));
            }
        }
        let seq = DegreeSequence::new(vec![2; 18], lattice, m).unwrap();
        let g = MultiGraph::from_parts(seq, edges, vec![0; 3]).unwrap();
        let ex = Explorer::new(&g);
        let out = ex
            .repeated_exploration(2, StopRule { threshold: m, budget: 100 }, &mut rng::master(2))
            .unwrap();
        assert_eq!(out.outcome, Outcome::ReachedThreshold);
        assert_eq!(out.attempts, 1);
    }

    #[test]
    fn died_exploration_recovers_component() {
        let mut r = rng::master(31);
        let dist = DegreeDistribution::from_masses(vec![0.2, 0.3, 0.3, 0.2]).unwrap();
        for (d, k, m) in [(1, 5, 4), (2, 3, 3), (1, 1, 10)] {
            let lattice = TorusLattice::new(d, k).unwrap();
            for _ in 0..40 {
                let seq = sample_degree_sequence(&dist, lattice, m, &mut r).unwrap();
                let g = generate(&seq, &mut r);
                let report = connected_components(&g);
                let ex = Explorer::new(&g);
                for v in 0..g.vertex_count() {
                    let s = run_out(&ex, v);
                    assert_eq!(s.explored(), report.members(report.label(v)));
                    let exposed: Vec<usize> = s.history().iter().map(|h| h.exposed).collect();
                    assert!(exposed.windows(2).all(|w| w[0] <= w[1]));
                    assert!(s.exposed() <= g.vertex_count());
                }
            }
        }
    }

    #[test]
    fn trace_csv() {
        let g = flat(3, vec![(0, 1), (1, 2)]);
        let s = run_out(&Explorer::new(&g), 0);
        let mut buf = Vec::new();
        write_trace(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("generation,active,exposed,collisions\n0,1,1,0\n1,1,2,0\n"));
    }
}
