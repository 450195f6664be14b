//! Configuration model with geometric compartment constraints on the d-torus.
//!
//! Vertices live in `k^d` compartments of `m` vertices each, arranged on a
//! cubic lattice with wrap-around. Half-edges are matched uniformly among all
//! pairs whose compartments are equal or `l1`-adjacent. The crate provides the
//! generator, component analysis, the generation-synchronous exploration
//! process, the branching-process machinery that bounds it from below, the
//! McDiarmid bounds used for concentration arguments and a scenario runner
//! that reproduces the giant-component law at desk scale.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod components;
pub mod concentration;
pub mod degree_model;
pub mod error;
pub mod experiments;
pub mod exploration;
pub mod rng;
pub mod torus_graph;

pub use degree_model::{DegreeDistribution, DegreeSequence};
pub use error::{Error, Result};
pub use torus_graph::{MultiGraph, TorusLattice};
