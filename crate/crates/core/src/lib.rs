//! Solver library for the warehouse-sharing supply network design problem:
//! factories ship commodities through shared warehouses to customers, with
//! distinct collection and delivery tours, optional multi-allocation of
//! nodes to several warehouses, and bulk inter-warehouse transfers.
//!
//! The crate provides:
//! - [`model`]: instance/solution data model, objective evaluation and
//!   feasibility certification;
//! - [`construction`]: the two-phase greedy + nearest-neighbour construction
//!   heuristic;
//! - [`alnds`]: the adaptive large neighbourhood decomposition search;
//! - [`exact`]: a brute-force optimum oracle for tiny instances and an
//!   LP-format MILP exporter with solution certification;
//! - [`generator`]: network ingestion and seeded instance generation;
//! - [`experiment`]: replicated runs, gap metrics and report emission.

pub mod alnds;
pub mod construction;
pub mod exact;
pub mod experiment;
pub mod generator;
pub mod model;

pub use model::{
    evaluate_objective, validate_instance, validate_solution, CostBreakdown, Instance, Solution,
    VariantConfig,
};
