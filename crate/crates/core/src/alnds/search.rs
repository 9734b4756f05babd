//! The adaptive large neighbourhood decomposition search loop.

use super::anneal::{accept, initial_temperature};
use super::bank::{OperatorStat, WeightedPool};
use super::destroy::{apply_destroy, DestroyOp};
use super::params::{ParamError, SearchParams};
use super::repair::{apply_repair, RepairOp};
use crate::construction::{construct_initial, ConstructionError};
use crate::model::{
    count_multi_allocation_nodes, evaluate_objective, validate_solution, CostBreakdown, Instance,
    Solution, VariantConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::time::Instant;
use thiserror::Error;

/// The decomposition: each iteration explores one subproblem's neighbourhood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subproblem {
    WarehouseLocation,
    Allocation,
    Routing,
}

impl Subproblem {
    pub const ALL: [Subproblem; 3] = [
        Subproblem::WarehouseLocation,
        Subproblem::Allocation,
        Subproblem::Routing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subproblem::WarehouseLocation => "warehouse-location",
            Subproblem::Allocation => "allocation",
            Subproblem::Routing => "routing",
        }
    }
}

/// Destroy operators available to a subproblem: warehouse moves for the
/// location subproblem; sub-node removals, the duplication pair and
/// commodity-granular removal for allocation; plain removals (with the
/// warehouse pinned on repair) for routing. Duplication is never offered
/// under single allocation.
pub fn allowed_destroy(subproblem: Subproblem, cfg: VariantConfig, op: DestroyOp) -> bool {
    use DestroyOp::*;
    let in_class = match subproblem {
        Subproblem::WarehouseLocation => matches!(op, WarehouseRemoval | WarehouseOpening),
        Subproblem::Allocation => matches!(
            op,
            RandomRemoval
                | WorstRemoval
                | ShawRemoval
                | Duplication
                | Deduplication
                | CommodityRemoval
                | WarehousePairRemoval
        ),
        Subproblem::Routing => matches!(op, RandomRemoval | WorstRemoval | ShawRemoval),
    };
    in_class && !(cfg == VariantConfig::WspsSa && op == Duplication)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorStats {
    pub subproblems: Vec<OperatorStat>,
    pub destroy: Vec<OperatorStat>,
    pub repair: Vec<OperatorStat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_solution: Solution,
    pub best_cost: CostBreakdown,
    /// Best-so-far total after each iteration (non-increasing).
    pub cost_trajectory: Vec<f64>,
    pub elapsed_seconds: f64,
    pub operator_stats: OperatorStats,
    pub n_multi_allocation: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("search produced an infeasible best solution: {0}")]
    Infeasible(String),
}

/// Temperature floor as a fraction of the start temperature.
const TEMPERATURE_FLOOR: f64 = 1e-10;

/// Run the full search: construction, then `params.iterations` rounds of
/// subproblem/destroy/repair selection with annealing acceptance and
/// segment-wise weight adaptation.
pub fn solve(
    inst: &Instance,
    cfg: VariantConfig,
    params: &SearchParams,
) -> Result<SolveResult, SolveError> {
    params.validate()?;
    let started = Instant::now();

    let (initial, _trace) = construct_initial(inst, cfg, params.seed)?;
    let f0 = evaluate_objective(inst, &initial).expect("constructed solution evaluates").total;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut current = initial.clone();
    let mut current_total = f0;
    let mut best = initial;
    let mut best_total = f0;
    let mut open: BTreeSet<usize> = current.used_warehouses();

    let t_start = if f0 > 0.0 {
        initial_temperature(f0, params.tstart_worse_fraction, params.tstart_accept_prob)?
    } else {
        1.0
    };
    let t_floor = TEMPERATURE_FLOOR * t_start;
    let mut temperature = t_start;

    let mut subproblems = WeightedPool::new(Subproblem::ALL);
    let mut destroys = WeightedPool::new(DestroyOp::ALL);
    let mut repairs = WeightedPool::new(RepairOp::ALL);

    let mut trajectory = Vec::with_capacity(params.iterations);
    let [deg_lo, deg_hi] = params.destroy_fraction_range;

    for iter in 0..params.iterations {
        let subproblem = subproblems.select(&mut rng, |_| true)?;
        let destroy_op = destroys.select(&mut rng, |op| allowed_destroy(subproblem, cfg, op))?;
        let repair_op = repairs.select(&mut rng, |_| true)?;
        let degree = if deg_lo == deg_hi {
            deg_lo
        } else {
            rng.random_range(deg_lo..=deg_hi)
        };

        let mut score = 0.0;
        if let Some(mut partial) =
            apply_destroy(inst, &current, &open, destroy_op, degree, cfg, &mut rng)
        {
            partial.lock_warehouse = subproblem == Subproblem::Routing;
            let candidate_open = partial.open_warehouses.clone();
            if let Ok(candidate) = apply_repair(inst, partial, repair_op, cfg, &mut rng) {
                debug_assert!(
                    validate_solution(inst, &candidate, cfg).is_feasible(),
                    "repair must produce feasible solutions"
                );
                let total = evaluate_objective(inst, &candidate)
                    .expect("repaired solution evaluates")
                    .total;
                let accepted;
                if total < best_total {
                    score = params.sigma1;
                    accepted = true;
                } else if total < current_total {
                    score = params.sigma2;
                    accepted = true;
                } else {
                    accepted = accept(total, current_total, temperature, &mut rng);
                    if accepted {
                        score = params.sigma3;
                    }
                }
                if accepted {
                    if total < best_total {
                        best = candidate.clone();
                        best_total = total;
                    }
                    current = candidate;
                    current_total = total;
                    open = candidate_open;
                }
            }
        }

        subproblems.record_use(subproblem, score);
        destroys.record_use(destroy_op, score);
        repairs.record_use(repair_op, score);

        temperature = (params.cooling_theta * temperature).max(t_floor);
        trajectory.push(best_total);

        if (iter + 1) % params.segment_length == 0 {
            subproblems.update_weights(params.eta);
            destroys.update_weights(params.eta);
            repairs.update_weights(params.eta);
        }
    }

    let report = validate_solution(inst, &best, cfg);
    if !report.is_feasible() {
        return Err(SolveError::Infeasible(report.to_string()));
    }
    let best_cost = evaluate_objective(inst, &best).expect("best solution evaluates");
    let n_multi_allocation = count_multi_allocation_nodes(&best);

    Ok(SolveResult {
        best_solution: best,
        best_cost,
        cost_trajectory: trajectory,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        operator_stats: OperatorStats {
            subproblems: stats(&subproblems, Subproblem::name),
            destroy: stats(&destroys, DestroyOp::name),
            repair: stats(&repairs, RepairOp::name),
        },
        n_multi_allocation,
    })
}

fn stats<T: Copy + PartialEq>(pool: &WeightedPool<T>, name: fn(T) -> &'static str) -> Vec<OperatorStat> {
    pool.entries
        .iter()
        .map(|e| OperatorStat {
            name: name(e.op).to_string(),
            weight: e.weight,
            uses: e.total_uses,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;

    fn quick_params(seed: u64, iterations: usize) -> SearchParams {
        SearchParams {
            iterations,
            segment_length: 20,
            seed,
            ..SearchParams::default()
        }
    }

    #[test]
    fn zero_iterations_returns_the_construction_solution() {
        let inst = two_by_two();
        let (expected, _) = construct_initial(&inst, VariantConfig::Wspsdp, 3).unwrap();
        let result = solve(&inst, VariantConfig::Wspsdp, &quick_params(3, 0)).unwrap();
        assert_eq!(result.best_solution, expected);
        assert!(result.cost_trajectory.is_empty());
    }

    #[test]
    fn toy_instance_reaches_the_known_optimum() {
        let inst = toy_1w1f1c();
        for seed in 0..3 {
            let result = solve(&inst, VariantConfig::Wspsdp, &quick_params(seed, 200)).unwrap();
            assert!((result.best_cost.total - 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trajectory_is_monotone_non_increasing() {
        let inst = two_by_two();
        let result = solve(&inst, VariantConfig::Wspsdp, &quick_params(1, 500)).unwrap();
        for w in result.cost_trajectory.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(
            result.cost_trajectory.last().copied().unwrap(),
            result.best_cost.total
        );
    }

    #[test]
    fn identical_seeds_give_identical_results() {
        let inst = two_by_two();
        let a = solve(&inst, VariantConfig::Wspsdp, &quick_params(9, 300)).unwrap();
        let b = solve(&inst, VariantConfig::Wspsdp, &quick_params(9, 300)).unwrap();
        assert_eq!(a.best_solution, b.best_solution);
        assert_eq!(a.cost_trajectory, b.cost_trajectory);
        assert_eq!(a.operator_stats, b.operator_stats);
    }

    #[test]
    fn variant_solutions_stay_wspsdp_feasible() {
        let inst = two_by_two();
        for cfg in [VariantConfig::WspsSa, VariantConfig::WspsWi] {
            let result = solve(&inst, cfg, &quick_params(5, 300)).unwrap();
            assert!(validate_solution(&inst, &result.best_solution, cfg).is_feasible());
            assert!(
                validate_solution(&inst, &result.best_solution, VariantConfig::Wspsdp)
                    .is_feasible()
            );
        }
    }

    #[test]
    fn weights_stay_positive() {
        let inst = two_by_two();
        let result = solve(&inst, VariantConfig::Wspsdp, &quick_params(2, 400)).unwrap();
        for pool in [
            &result.operator_stats.subproblems,
            &result.operator_stats.destroy,
            &result.operator_stats.repair,
        ] {
            for op in pool {
                assert!(op.weight > 0.0, "{} weight {}", op.name, op.weight);
            }
        }
    }
}
