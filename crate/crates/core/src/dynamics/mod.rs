//! Stochastic dynamics on the ring: exact event-driven engines, the
//! graphical construction, interaction graphs and current bookkeeping.

mod configuration;
mod current;
mod engine;
pub mod graph;
pub mod harris;
mod tree;

pub use configuration::Configuration;
pub use current::{measure_current, Checkpoint, CurrentCounter, CurrentEstimate};
pub use engine::{
    run_kexclusion, run_zrp, Engine, JumpModel, KExclusionEngine, KExclusionModel, RunOptions, Sentinel, Trajectory,
    ZrpEngine, ZrpModel,
};
pub use graph::{build_interaction_graph, percolation_experiment, InteractionGraph, Lattice};
pub use harris::{run_harris, thinning_acceptance, GraphicalSchedule, HarrisRun};
pub use tree::RateTree;
