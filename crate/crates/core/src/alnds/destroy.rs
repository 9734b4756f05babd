//! Destroy operators: sub-node removals, warehouse open/close moves and the
//! duplication/deduplication pair enabling multi-allocation.

use super::partial::PartialSolution;
use crate::model::{Instance, NodeId, RouteKind, Solution, VariantConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DestroyOp {
    /// Remove sub-nodes picked uniformly at random.
    RandomRemoval,
    /// Repeatedly remove the sub-node with the highest removal saving.
    WorstRemoval,
    /// Remove the sub-nodes most related (closest) to a random seed sub-node.
    ShawRemoval,
    /// Close one open warehouse, evicting all its sub-nodes.
    WarehouseRemoval,
    /// Mark a closed warehouse open; removes nothing, biases later repairs.
    WarehouseOpening,
    /// Split a multi-commodity sub-node in half; the new half joins the pool.
    Duplication,
    /// Drop one sub-node of a multi-allocated node.
    Deduplication,
    /// Lift whole commodities out of both their sub-nodes, freeing the
    /// capacity they pin on each side at once.
    CommodityRemoval,
    /// Evict everything at two open warehouses (both stay open) so repair
    /// can rebuild their contents jointly. Escapes capacity-locked swaps
    /// that no smaller removal can reach.
    WarehousePairRemoval,
}

impl DestroyOp {
    pub const ALL: [DestroyOp; 9] = [
        DestroyOp::RandomRemoval,
        DestroyOp::WorstRemoval,
        DestroyOp::ShawRemoval,
        DestroyOp::WarehouseRemoval,
        DestroyOp::WarehouseOpening,
        DestroyOp::Duplication,
        DestroyOp::Deduplication,
        DestroyOp::CommodityRemoval,
        DestroyOp::WarehousePairRemoval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DestroyOp::RandomRemoval => "random-removal",
            DestroyOp::WorstRemoval => "worst-removal",
            DestroyOp::ShawRemoval => "shaw-removal",
            DestroyOp::WarehouseRemoval => "warehouse-removal",
            DestroyOp::WarehouseOpening => "warehouse-opening",
            DestroyOp::Duplication => "duplication",
            DestroyOp::Deduplication => "deduplication",
            DestroyOp::CommodityRemoval => "commodity-removal",
            DestroyOp::WarehousePairRemoval => "warehouse-pair-removal",
        }
    }
}

fn removal_count(partial: &PartialSolution, degree: f64) -> usize {
    let total = partial.num_sub_nodes();
    ((degree * total as f64).ceil() as usize).clamp(1, total)
}

/// Apply a destroy operator; `None` signals an inapplicable operator (the
/// iteration is scored zero). Under `WspsSa`, duplication is never offered.
pub fn apply_destroy<R: Rng + ?Sized>(
    inst: &Instance,
    sol: &Solution,
    open: &BTreeSet<NodeId>,
    op: DestroyOp,
    degree: f64,
    _cfg: VariantConfig,
    rng: &mut R,
) -> Option<PartialSolution> {
    let mut partial = PartialSolution::from_solution(inst, sol, open);
    match op {
        DestroyOp::RandomRemoval => {
            if partial.num_sub_nodes() == 0 {
                return None;
            }
            let count = removal_count(&partial, degree);
            let mut ids = partial.sub_node_identities();
            for _ in 0..count {
                let pick = rng.random_range(0..ids.len());
                let (node, w, kind) = ids.swap_remove(pick);
                partial.remove_sub_node(inst, node, w, kind);
            }
        }
        DestroyOp::WorstRemoval => {
            if partial.num_sub_nodes() == 0 {
                return None;
            }
            let count = removal_count(&partial, degree);
            for _ in 0..count {
                let mut best: Option<(f64, NodeId, NodeId, RouteKind)> = None;
                for (ri, route) in partial.routes.iter().enumerate() {
                    for (vi, visit) in route.visits.iter().enumerate() {
                        let saving = partial.removal_saving(inst, ri, vi);
                        let key = (saving, visit.node, visit.warehouse, route.kind);
                        let better = match &best {
                            None => true,
                            Some((s, n, w, _)) => {
                                saving > *s
                                    || (saving == *s && (visit.node, visit.warehouse) < (*n, *w))
                            }
                        };
                        if better {
                            best = Some(key);
                        }
                    }
                }
                let (_, node, w, kind) = best?;
                partial.remove_sub_node(inst, node, w, kind);
            }
        }
        DestroyOp::ShawRemoval => {
            if partial.num_sub_nodes() == 0 {
                return None;
            }
            let count = removal_count(&partial, degree);
            let ids = partial.sub_node_identities();
            let seed = ids[rng.random_range(0..ids.len())];
            let max_dist = inst.max_distance().max(f64::MIN_POSITIVE);
            // Relatedness: symmetrized distance between physical nodes,
            // normalized by the largest matrix entry.
            let mut ranked: Vec<(f64, NodeId, NodeId, RouteKind)> = ids
                .iter()
                .map(|&(node, w, kind)| {
                    let d = 0.5 * (inst.dist(seed.0, node) + inst.dist(node, seed.0));
                    (d / max_dist, node, w, kind)
                })
                .collect();
            ranked.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap()
                    .then(a.1.cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });
            for &(_, node, w, kind) in ranked.iter().take(count) {
                partial.remove_sub_node(inst, node, w, kind);
            }
        }
        DestroyOp::WarehouseRemoval => {
            if partial.open_warehouses.len() < 2 {
                return None;
            }
            let candidates: Vec<NodeId> = partial.open_warehouses.iter().copied().collect();
            let w = candidates[rng.random_range(0..candidates.len())];
            let evicted: Vec<(NodeId, NodeId, RouteKind)> = partial
                .sub_node_identities()
                .into_iter()
                .filter(|&(_, sw, _)| sw == w)
                .collect();
            for (node, sw, kind) in evicted {
                partial.remove_sub_node(inst, node, sw, kind);
            }
            partial.open_warehouses.remove(&w);
        }
        DestroyOp::WarehouseOpening => {
            let closed: Vec<NodeId> = inst
                .warehouses()
                .iter()
                .copied()
                .filter(|w| !partial.open_warehouses.contains(w))
                .collect();
            if closed.is_empty() {
                return None;
            }
            let w = closed[rng.random_range(0..closed.len())];
            partial.open_warehouses.insert(w);
        }
        DestroyOp::Duplication => {
            let eligible: Vec<(NodeId, NodeId, RouteKind)> = partial
                .routes
                .iter()
                .flat_map(|r| {
                    r.visits
                        .iter()
                        .filter(|v| v.commodities.len() >= 2)
                        .map(move |v| (v.node, v.warehouse, r.kind))
                })
                .collect();
            if eligible.is_empty() {
                return None;
            }
            let (node, w, kind) = eligible[rng.random_range(0..eligible.len())];
            let (ri, vi) = partial.find_visit(node, w, kind).expect("eligible visit");
            let all: Vec<_> = partial.routes[ri].visits[vi].commodities.iter().copied().collect();
            // The kept half stays routed; the moved half joins the pool
            // unassigned, free to land at another warehouse.
            let moved = all[all.len().div_ceil(2)..].to_vec();
            for &k in &moved {
                partial.routes[ri].visits[vi].commodities.remove(&k);
                partial.unassign_commodity(inst, k, kind);
            }
            partial.pool.push(super::partial::RemovedItem {
                node,
                kind,
                commodities: moved.into_iter().collect(),
                origin: w,
            });
        }
        DestroyOp::CommodityRemoval => {
            let total = inst.commodities().len();
            if total == 0 || partial.num_sub_nodes() == 0 {
                return None;
            }
            let count = ((degree * total as f64).ceil() as usize).clamp(1, total);
            let mut ids: Vec<usize> = (0..total).collect();
            for _ in 0..count {
                let pick = rng.random_range(0..ids.len());
                let k = ids.swap_remove(pick);
                partial.remove_commodity(inst, k, RouteKind::Collection);
                partial.remove_commodity(inst, k, RouteKind::Delivery);
            }
        }
        DestroyOp::WarehousePairRemoval => {
            if partial.open_warehouses.len() < 2 {
                return None;
            }
            let open: Vec<NodeId> = partial.open_warehouses.iter().copied().collect();
            let first = rng.random_range(0..open.len());
            let mut second = rng.random_range(0..open.len() - 1);
            if second >= first {
                second += 1;
            }
            let picked = [open[first], open[second]];
            let evicted: Vec<(NodeId, NodeId, RouteKind)> = partial
                .sub_node_identities()
                .into_iter()
                .filter(|&(_, sw, _)| picked.contains(&sw))
                .collect();
            if evicted.is_empty() {
                return None;
            }
            for (node, sw, kind) in evicted {
                partial.remove_sub_node(inst, node, sw, kind);
            }
        }
        DestroyOp::Deduplication => {
            let mut per_node: std::collections::BTreeMap<NodeId, Vec<(NodeId, RouteKind)>> =
                std::collections::BTreeMap::new();
            for (node, w, kind) in partial.sub_node_identities() {
                per_node.entry(node).or_default().push((w, kind));
            }
            let multi: Vec<(NodeId, Vec<(NodeId, RouteKind)>)> = per_node
                .into_iter()
                .filter(|(_, ws)| {
                    ws.iter().map(|(w, _)| *w).collect::<BTreeSet<_>>().len() >= 2
                })
                .collect();
            if multi.is_empty() {
                return None;
            }
            let (node, subs) = &multi[rng.random_range(0..multi.len())];
            let (w, kind) = subs[rng.random_range(0..subs.len())];
            partial.remove_sub_node(inst, *node, w, kind);
        }
    }
    Some(partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_degree_random_removal_empties_routes() {
        let inst = toy_2w1f2c();
        let sol = toy_2w1f2c_split_solution();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
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
        assert_eq!(partial.num_sub_nodes(), 0);
        assert_eq!(partial.pool.len(), 4);
    }

    #[test]
    fn deduplication_without_multi_allocation_is_a_noop() {
        let inst = toy_1w1f1c();
        let sol = toy_1w1f1c_solution();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(apply_destroy(
            &inst,
            &sol,
            &sol.used_warehouses(),
            DestroyOp::Deduplication,
            0.3,
            VariantConfig::Wspsdp,
            &mut rng,
        )
        .is_none());
    }

    #[test]
    fn worst_removal_takes_the_highest_saving_sub_node_first() {
        let inst = toy_2w1f2c();
        let sol = toy_2w1f2c_split_solution();
        // Hand-computed removal savings: (2,w0) detour 6 + variable 2 = 8;
        // (2,w1) detour 12 + variable 1 = 13; (3,w0) detour 8; (4,w1)
        // detour 6. The factory sub-node at w1 goes first.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let partial = apply_destroy(
            &inst,
            &sol,
            &sol.used_warehouses(),
            DestroyOp::WorstRemoval,
            0.2, // one sub-node
            VariantConfig::Wspsdp,
            &mut rng,
        )
        .unwrap();
        assert_eq!(partial.pool.len(), 1);
        let item = &partial.pool[0];
        assert_eq!((item.node, item.origin), (2, 1));
    }

    #[test]
    fn warehouse_removal_needs_two_open() {
        let inst = toy_1w1f1c();
        let sol = toy_1w1f1c_solution();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(apply_destroy(
            &inst,
            &sol,
            &sol.used_warehouses(),
            DestroyOp::WarehouseRemoval,
            0.3,
            VariantConfig::Wspsdp,
            &mut rng,
        )
        .is_none());
    }

    #[test]
    fn warehouse_opening_extends_open_set() {
        let inst = toy_2w1f1c();
        // Solution uses only warehouse 0.
        let sol = {
            let mut s = toy_2w1f1c_transfer_solution();
            s.routes[1].warehouse = 0;
            s.routes[1].visits[0].warehouse = 0;
            s.assignment.pairs[0] = (0, 0);
            s
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let partial = apply_destroy(
            &inst,
            &sol,
            &sol.used_warehouses(),
            DestroyOp::WarehouseOpening,
            0.3,
            VariantConfig::Wspsdp,
            &mut rng,
        )
        .unwrap();
        assert!(partial.open_warehouses.contains(&1));
        assert!(partial.pool.is_empty());
    }
}
