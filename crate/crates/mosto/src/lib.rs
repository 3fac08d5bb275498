//! Pareto-optimal TCP relay chains over an RTT mesh.
//!
//! This crate computes, for every pair of relay nodes, the full Pareto front
//! of simple paths under two criteria — total round-trip length and largest
//! single-link RTT — and builds on it:
//!
//! * [`topology`] parses relay graphs and closes them into full RTT meshes;
//! * [`pareto`] computes the per-pair fronts with a baseline and a pruned
//!   algorithm that provably agree;
//! * [`transfer`] models slow-start transfer times and picks the best chain
//!   from a front for a given transfer size;
//! * [`sim`] replays chains in a segment-level discrete-event simulator,
//!   including relay hand-off (offload) back to the plain path;
//! * [`controller`] keeps published chain tables fresh as measurements drift;
//! * [`report`] summarizes chain-versus-direct comparisons.

pub mod controller;
pub mod pareto;
pub mod report;
pub mod sim;
pub mod topology;
pub mod transfer;

pub use controller::{Controller, ControllerConfig, MeasurementUpdate, TableHandle};
pub use pareto::{
    compute_front, pareto_baseline, pareto_optimized, Algorithm, ParetoFront, ParetoPath,
    ParetoStats,
};
pub use report::ComparisonReport;
pub use sim::{run_scenario, simulate_chain_transfer, Scenario, SimError, SimReport};
pub use topology::{build_full_mesh, parse_topology, DistanceMatrix, ProxyGraph};
pub use transfer::{select_chain, ChainLookupTable, TransferError, TransferModel};

// Compile the guide's code blocks as doc-tests so the book in `book/` can
// never drift from the library. Each chapter becomes a hidden module whose
// documentation is the chapter itself; `cargo test --doc` runs the snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/topology.md")]
    mod topology {}
    #[doc = include_str!("../../../book/src/pareto.md")]
    mod pareto {}
    #[doc = include_str!("../../../book/src/transfer-model.md")]
    mod transfer_model {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/offload.md")]
    mod offload {}
    #[doc = include_str!("../../../book/src/controller.md")]
    mod controller {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
