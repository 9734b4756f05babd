//! Repair operators: greedy and regret-2 insertion of pooled items.

use super::partial::{make_sub_node, PartialSolution, RemovedItem};
use crate::model::{
    Instance, NodeId, Route, RouteKind, Solution, VariantConfig, CAPACITY_TOLERANCE,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairOp {
    /// Insert each item at the globally cheapest feasible position.
    GreedyInsertion,
    /// Insert the item with the largest best-to-second-best gap first.
    Regret2Insertion,
    /// Greedy with randomized item order: perturbs each item's score so
    /// deterministic rebuild loops cannot trap the search.
    NoisedGreedyInsertion,
}

impl RepairOp {
    pub const ALL: [RepairOp; 3] = [
        RepairOp::GreedyInsertion,
        RepairOp::Regret2Insertion,
        RepairOp::NoisedGreedyInsertion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RepairOp::GreedyInsertion => "greedy-insertion",
            RepairOp::Regret2Insertion => "regret-2-insertion",
            RepairOp::NoisedGreedyInsertion => "noised-greedy-insertion",
        }
    }
}

/// Relative amplitude of the noise applied to insertion scores.
const NOISE_SPAN: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum RepairFailure {
    #[error("no feasible insertion for node {node} ({kind:?} side)")]
    NoFeasibleInsertion { node: NodeId, kind: RouteKind },
    #[error("pool emptied but assignment still incomplete")]
    IncompleteAssignment,
}

/// Where an item lands.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Target {
    /// Join an existing sub-node of the same (node, warehouse, kind).
    Merge { route: usize, visit: usize },
    /// New visit on an existing route, before position `pos`.
    Visit { route: usize, pos: usize },
    /// Fresh single-visit route.
    NewRoute,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Insertion {
    cost: f64,
    warehouse: NodeId,
    target: Target,
}

/// Best and second-best insertion over distinct (warehouse, route) slots.
struct ItemOptions {
    best: Option<Insertion>,
    second_cost: Option<f64>,
}

fn offer(ins: Insertion, best: &mut Option<Insertion>, second: &mut Option<f64>) {
    match best {
        Some(b) if ins.cost >= b.cost => {
            if second.is_none() || ins.cost < second.unwrap() {
                *second = Some(ins.cost);
            }
        }
        Some(b) => {
            *second = Some(b.cost);
            *best = Some(ins);
        }
        None => *best = Some(ins),
    }
}

/// Added cost of placing `item` at warehouse `w`: tour detour plus variable
/// cost (collection side) plus transfer terms for commodities whose other
/// endpoint is already placed.
fn static_cost(inst: &Instance, partial: &PartialSolution, item: &RemovedItem, w: NodeId) -> f64 {
    let mut cost = 0.0;
    for &k in &item.commodities {
        let q = inst.commodity(k).quantity;
        if item.kind == RouteKind::Collection {
            cost += inst.warehouse_unit_cost(w) * q;
            if let Some(n) = partial.other_side(k, item.kind) {
                cost += inst.alpha() * inst.dist(w, n) * q;
            }
        } else if let Some(m) = partial.other_side(k, item.kind) {
            cost += inst.alpha() * inst.dist(m, w) * q;
        }
    }
    cost
}

fn warehouse_allowed(
    partial: &PartialSolution,
    item: &RemovedItem,
    w: NodeId,
    cfg: VariantConfig,
) -> bool {
    if partial.lock_warehouse && w != item.origin {
        return false;
    }
    match cfg {
        VariantConfig::Wspsdp => true,
        VariantConfig::WspsSa => {
            // Single allocation: the node may not sit at any other warehouse.
            partial
                .routes
                .iter()
                .flat_map(|r| r.visits.iter())
                .all(|v| v.node != item.node || v.warehouse == w)
        }
        VariantConfig::WspsWi => {
            // No transfers: both endpoints of a commodity share a warehouse.
            item.commodities.iter().all(|&k| {
                partial
                    .other_side(k, item.kind)
                    .map_or(true, |other| other == w)
            })
        }
    }
}

fn item_options(
    inst: &Instance,
    partial: &PartialSolution,
    item: &RemovedItem,
    cfg: VariantConfig,
) -> ItemOptions {
    let load: f64 = item
        .commodities
        .iter()
        .map(|&k| inst.commodity(k).quantity)
        .sum();
    let vehicle_cap = inst.vehicle_capacity() + CAPACITY_TOLERANCE;
    let mut best: Option<Insertion> = None;
    let mut second: Option<f64> = None;

    for &w in &partial.open_warehouses {
        if !warehouse_allowed(partial, item, w, cfg) {
            continue;
        }
        let needed: f64 = item
            .commodities
            .iter()
            .map(|&k| partial.marginal(inst, k, item.kind, w))
            .sum();
        if needed > partial.headroom(inst, w) {
            continue;
        }
        let static_cost = static_cost(inst, partial, item, w);

        // An existing sub-node of the same pairing forces a merge (one
        // vehicle per node-warehouse pair).
        if let Some((ri, vi)) = partial.find_visit(item.node, w, item.kind) {
            if partial.route_load(inst, ri) + load <= vehicle_cap {
                offer(
                    Insertion {
                        cost: static_cost,
                        warehouse: w,
                        target: Target::Merge { route: ri, visit: vi },
                    },
                    &mut best,
                    &mut second,
                );
            }
            continue;
        }
        if load > vehicle_cap {
            continue;
        }

        // Cheapest position per existing route of this warehouse and kind.
        for (ri, route) in partial.routes.iter().enumerate() {
            if route.warehouse != w || route.kind != item.kind {
                continue;
            }
            if partial.route_load(inst, ri) + load > vehicle_cap {
                continue;
            }
            let mut route_best: Option<(f64, usize)> = None;
            for pos in 0..=route.visits.len() {
                let prev = if pos == 0 { w } else { route.visits[pos - 1].node };
                let next = if pos == route.visits.len() {
                    w
                } else {
                    route.visits[pos].node
                };
                let detour = inst.beta()
                    * (inst.dist(prev, item.node) + inst.dist(item.node, next)
                        - inst.dist(prev, next));
                if route_best.is_none() || detour < route_best.unwrap().0 {
                    route_best = Some((detour, pos));
                }
            }
            if let Some((detour, pos)) = route_best {
                offer(
                    Insertion {
                        cost: static_cost + detour,
                        warehouse: w,
                        target: Target::Visit { route: ri, pos },
                    },
                    &mut best,
                    &mut second,
                );
            }
        }

        // Opening a fresh route is always an option.
        let fresh = inst.beta() * (inst.dist(w, item.node) + inst.dist(item.node, w));
        offer(
            Insertion {
                cost: static_cost + fresh,
                warehouse: w,
                target: Target::NewRoute,
            },
            &mut best,
            &mut second,
        );
    }

    ItemOptions { best, second_cost: second }
}

fn apply_insertion(
    inst: &Instance,
    partial: &mut PartialSolution,
    item: &RemovedItem,
    ins: Insertion,
) {
    match ins.target {
        Target::Merge { route, visit } => {
            let slot = &mut partial.routes[route].visits[visit];
            for &k in &item.commodities {
                slot.commodities.insert(k);
            }
        }
        Target::Visit { route, pos } => {
            let sub = make_sub_node(item, ins.warehouse);
            partial.routes[route].visits.insert(pos, sub);
        }
        Target::NewRoute => {
            partial.routes.push(Route {
                warehouse: ins.warehouse,
                kind: item.kind,
                visits: vec![make_sub_node(item, ins.warehouse)],
            });
        }
    }
    for &k in &item.commodities {
        partial.assign(inst, k, item.kind, ins.warehouse);
    }
}

/// Complete a partial solution by reinserting every pooled item. A pool that
/// cannot be placed (capacity exhausted) fails the repair; the caller skips
/// the iteration.
pub fn apply_repair<R: Rng + ?Sized>(
    inst: &Instance,
    mut partial: PartialSolution,
    op: RepairOp,
    cfg: VariantConfig,
    rng: &mut R,
) -> Result<Solution, RepairFailure> {
    while !partial.pool.is_empty() {
        let mut chosen: Option<(usize, Insertion)> = None;
        match op {
            RepairOp::GreedyInsertion | RepairOp::NoisedGreedyInsertion => {
                let mut best_score = f64::INFINITY;
                for (i, item) in partial.pool.iter().enumerate() {
                    if let Some(ins) = item_options(inst, &partial, item, cfg).best {
                        let score = if op == RepairOp::NoisedGreedyInsertion {
                            ins.cost + (ins.cost.abs() + 1.0) * rng.random_range(-NOISE_SPAN..=NOISE_SPAN)
                        } else {
                            ins.cost
                        };
                        if score < best_score {
                            best_score = score;
                            chosen = Some((i, ins));
                        }
                    }
                }
            }
            RepairOp::Regret2Insertion => {
                let mut best_key = (f64::NEG_INFINITY, f64::INFINITY);
                for (i, item) in partial.pool.iter().enumerate() {
                    let opts = item_options(inst, &partial, item, cfg);
                    if let Some(ins) = opts.best {
                        // A single feasible slot means infinite regret.
                        let regret = opts
                            .second_cost
                            .map_or(f64::INFINITY, |s| s - ins.cost);
                        let key = (regret, ins.cost);
                        if key.0 > best_key.0 || (key.0 == best_key.0 && key.1 < best_key.1) {
                            best_key = key;
                            chosen = Some((i, ins));
                        }
                    }
                }
            }
        }
        match chosen {
            Some((i, ins)) => {
                let item = partial.pool.remove(i);
                apply_insertion(inst, &mut partial, &item, ins);
            }
            None => {
                let stuck = &partial.pool[0];
                return Err(RepairFailure::NoFeasibleInsertion {
                    node: stuck.node,
                    kind: stuck.kind,
                });
            }
        }
    }
    partial
        .into_solution()
        .ok_or(RepairFailure::IncompleteAssignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alnds::destroy::{apply_destroy, DestroyOp};
    use crate::construction::construct_initial;
    use crate::model::testutil::*;
    use crate::model::{evaluate_objective, validate_solution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_pool_returns_solution_unchanged() {
        let inst = toy_1w1f1c();
        let sol = toy_1w1f1c_solution();
        let partial = PartialSolution::from_solution(&inst, &sol, &sol.used_warehouses());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let repaired =
            apply_repair(&inst, partial, RepairOp::GreedyInsertion, VariantConfig::Wspsdp, &mut rng)
                .unwrap();
        assert_eq!(repaired, sol);
    }

    #[test]
    fn full_destroy_then_repair_restores_the_unique_toy_solution() {
        let inst = toy_1w1f1c();
        let (sol, _) = construct_initial(&inst, VariantConfig::Wspsdp, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for op in RepairOp::ALL {
            let partial = apply_destroy(
                &inst,
                &sol,
                &sol.used_warehouses(),
                DestroyOp::RandomRemoval,
                1.0,
                VariantConfig::Wspsdp,
                &mut rng,
            )
            .unwrap();
            let repaired = apply_repair(&inst, partial, op, VariantConfig::Wspsdp, &mut rng).unwrap();
            let cost = evaluate_objective(&inst, &repaired).unwrap();
            assert!((cost.total - 16.0).abs() < 1e-9);
            assert!(validate_solution(&inst, &repaired, VariantConfig::Wspsdp).is_feasible());
        }
    }

    #[test]
    fn regret_prefers_the_item_with_more_to_lose() {
        // Two items: costs {best 5, second 9} and {best 6, second 7};
        // regret-2 must insert the first one first (4 > 1).
        let at = |cost| Insertion { cost, warehouse: 0, target: Target::NewRoute };
        let mut best = None;
        let mut second = None;
        offer(at(9.0), &mut best, &mut second);
        offer(at(5.0), &mut best, &mut second);
        assert_eq!(best.unwrap().cost, 5.0);
        assert_eq!(second.unwrap(), 9.0);
        let regret_a = second.unwrap() - best.unwrap().cost;

        let mut best_b = None;
        let mut second_b = None;
        offer(at(6.0), &mut best_b, &mut second_b);
        offer(at(7.0), &mut best_b, &mut second_b);
        let regret_b = second_b.unwrap() - best_b.unwrap().cost;
        assert!(regret_a > regret_b);
    }

    #[test]
    fn repairs_respect_every_variant() {
        let inst = two_by_two();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for cfg in VariantConfig::all() {
            let (sol, _) = construct_initial(&inst, cfg, 0).unwrap();
            for dop in [DestroyOp::RandomRemoval, DestroyOp::WorstRemoval, DestroyOp::ShawRemoval] {
                for rop in RepairOp::ALL {
                    if let Some(partial) = apply_destroy(
                        &inst,
                        &sol,
                        &sol.used_warehouses(),
                        dop,
                        0.5,
                        cfg,
                        &mut rng,
                    ) {
                        if let Ok(repaired) = apply_repair(&inst, partial, rop, cfg, &mut rng) {
                            let report = validate_solution(&inst, &repaired, cfg);
                            assert!(report.is_feasible(), "{cfg} {dop:?} {rop:?}: {report}");
                        }
                    }
                }
            }
        }
    }
}
