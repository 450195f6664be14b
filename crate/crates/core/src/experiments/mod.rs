//! Configuration-driven Monte Carlo scenarios and the analytic bound
//! evaluators they report against.

pub mod bounds;
pub mod config;
pub mod output;
pub mod scenarios;

pub use bounds::{bound_a_n, bound_b_n, bound_c_n, evaluate_bounds, BoundInputs, BoundReport};
pub use config::{ScenarioConfig, ScheduleEntry};
pub use output::{output_dir, ScenarioOutput, Table, OUT_DIR_ENV};
pub use scenarios::{
    run_conjecture_scan, run_counterexample, run_exploration_success, run_extinction_convergence,
    run_giant_component, run_percolation, sample_graph, ConjectureRun, CounterexampleRun, ExplorationRun,
    ExtinctionRun, GiantRun, PercolationRun,
};
