//! Adaptive large neighbourhood decomposition search: weighted subproblem,
//! destroy and repair pools with roulette selection, segment-wise weight
//! adaptation and simulated-annealing acceptance.

mod anneal;
mod bank;
mod destroy;
mod params;
mod partial;
mod repair;
mod search;

pub use anneal::{accept, initial_temperature};
pub use bank::{select_weighted, OperatorStat, PoolEntry, WeightedPool};
pub use destroy::{apply_destroy, DestroyOp};
pub use params::{ParamError, SearchParams};
pub use partial::{PartialSolution, RemovedItem};
pub use repair::{apply_repair, RepairFailure, RepairOp};
pub use search::{allowed_destroy, solve, OperatorStats, SolveError, SolveResult, Subproblem};
