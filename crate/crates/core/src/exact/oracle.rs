//! Exhaustive optimum for tiny instances: enumerate per-commodity warehouse
//! assignments, then optimally partition each warehouse's sub-nodes into
//! capacity-feasible routes with enumerated tours.

use crate::model::{
    evaluate_objective, validate_instance, CommodityAssignment, CostBreakdown, Instance, NodeId,
    Route, RouteKind, Solution, SubNode, VariantConfig, CAPACITY_TOLERANCE,
};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleLimits {
    pub max_non_warehouse: usize,
    pub max_warehouses: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_non_warehouse: 6, max_warehouses: 3 }
    }
}

/// Hard cap on the enumerated assignment pool regardless of limits.
const MAX_CONFIGS: u128 = 20_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(
        "instance too large to enumerate: {non_warehouse} non-warehouse nodes \
         (max {max_non_warehouse}), {warehouses} warehouses (max {max_warehouses})"
    )]
    TooLarge {
        non_warehouse: usize,
        warehouses: usize,
        max_non_warehouse: usize,
        max_warehouses: usize,
    },
    #[error("no feasible solution: {binding}")]
    Infeasible { binding: String },
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
}

/// Closed-tour costs per (warehouse, node subset) with the optimal visit
/// order, computed by lexicographic permutation enumeration.
struct TourTable {
    /// `costs[warehouse_index][mask]`, mask over side-node indices.
    costs: Vec<Vec<f64>>,
    orders: Vec<Vec<Vec<u8>>>,
}

fn tour_table(inst: &Instance, side_nodes: &[NodeId]) -> TourTable {
    let warehouses = inst.warehouses();
    let s = side_nodes.len();
    let masks = 1usize << s;
    let mut costs = vec![vec![0.0; masks]; warehouses.len()];
    let mut orders = vec![vec![Vec::new(); masks]; warehouses.len()];

    for (wi, &w) in warehouses.iter().enumerate() {
        for mask in 1..masks {
            let members: Vec<u8> = (0..s as u8).filter(|&i| mask & (1 << i) != 0).collect();
            let mut best = f64::INFINITY;
            let mut best_order = Vec::new();
            permute_lex(&members, &mut |perm| {
                let mut cost = 0.0;
                let mut prev = w;
                for &i in perm {
                    cost += inst.dist(prev, side_nodes[i as usize]);
                    prev = side_nodes[i as usize];
                }
                cost += inst.dist(prev, w);
                if cost < best {
                    best = cost;
                    best_order = perm.to_vec();
                }
            });
            costs[wi][mask] = best;
            orders[wi][mask] = best_order;
        }
    }
    TourTable { costs, orders }
}

/// Visit every permutation of `items` in lexicographic order.
fn permute_lex(items: &[u8], visit: &mut impl FnMut(&[u8])) {
    let mut buf = items.to_vec();
    let mut used = vec![false; items.len()];
    let mut acc = Vec::with_capacity(items.len());
    fn rec(
        items: &[u8],
        used: &mut [bool],
        acc: &mut Vec<u8>,
        visit: &mut impl FnMut(&[u8]),
    ) {
        if acc.len() == items.len() {
            visit(acc);
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                acc.push(items[i]);
                rec(items, used, acc, visit);
                acc.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut buf, &mut used, &mut acc, visit);
}

/// One enumerated warehouse assignment of a side (collection or delivery).
#[derive(Clone, Debug)]
struct SideConfig {
    code: u64,
    /// Warehouse index per commodity.
    assign: Vec<u8>,
    routing: f64,
    /// Variable cost (collection side only).
    var_cost: f64,
    /// Flow entering each warehouse from this side alone.
    side_load: Vec<f64>,
}

struct SideContext<'a> {
    inst: &'a Instance,
    kind: RouteKind,
    side_nodes: Vec<NodeId>,
    /// Side-node index per commodity.
    endpoint: Vec<usize>,
    tours: TourTable,
}

impl<'a> SideContext<'a> {
    fn new(inst: &'a Instance, kind: RouteKind) -> Self {
        let side_nodes: Vec<NodeId> = match kind {
            RouteKind::Collection => inst.factories().to_vec(),
            RouteKind::Delivery => inst.customers().to_vec(),
        };
        let endpoint = inst
            .commodities()
            .iter()
            .map(|c| {
                let node = match kind {
                    RouteKind::Collection => c.factory,
                    RouteKind::Delivery => c.customer,
                };
                side_nodes.iter().position(|&x| x == node).expect("endpoint is a side node")
            })
            .collect();
        let tours = tour_table(inst, &side_nodes);
        SideContext { inst, kind, side_nodes, endpoint, tours }
    }

    /// Group loads per (side node, warehouse); `None` when a single group
    /// overflows one vehicle.
    fn group_loads(&self, assign: &[u8]) -> Option<Vec<Vec<f64>>> {
        let w = self.inst.warehouses().len();
        let mut loads = vec![vec![0.0; w]; self.side_nodes.len()];
        for (k, &wi) in assign.iter().enumerate() {
            loads[self.endpoint[k]][wi as usize] += self.inst.commodity(k).quantity;
        }
        let cap = self.inst.vehicle_capacity() + CAPACITY_TOLERANCE;
        for row in &loads {
            for &l in row {
                if l > cap {
                    return None;
                }
            }
        }
        Some(loads)
    }

    /// Optimal routing cost of an assignment, summed over warehouses.
    fn routing_cost(&self, loads: &[Vec<f64>]) -> f64 {
        let w = self.inst.warehouses().len();
        let mut total = 0.0;
        for wi in 0..w {
            let mask = self.warehouse_mask(loads, wi);
            if mask != 0 {
                let node_loads: Vec<f64> = (0..self.side_nodes.len())
                    .map(|i| loads[i][wi])
                    .collect();
                total += self.partition(wi, mask, &node_loads).0;
            }
        }
        total
    }

    fn warehouse_mask(&self, loads: &[Vec<f64>], wi: usize) -> usize {
        let mut mask = 0usize;
        for (i, row) in loads.iter().enumerate() {
            if row[wi] > 0.0 {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Set-partition DP over the sub-nodes at one warehouse: minimal total
    /// tour cost over vehicle-feasible groups, with the chosen groups.
    fn partition(&self, wi: usize, full: usize, node_loads: &[f64]) -> (f64, Vec<usize>) {
        let cap = self.inst.vehicle_capacity() + CAPACITY_TOLERANCE;
        let mut load_of = vec![0.0; full + 1];
        for mask in 1..=full {
            if mask & !full != 0 {
                continue;
            }
            let low = mask.trailing_zeros() as usize;
            load_of[mask] = load_of[mask & (mask - 1)] + node_loads[low];
        }
        let mut cost = vec![f64::INFINITY; full + 1];
        let mut choice = vec![0usize; full + 1];
        cost[0] = 0.0;
        for mask in 1..=full {
            if mask & !full != 0 {
                continue;
            }
            let low_bit = 1usize << mask.trailing_zeros();
            // Enumerate subsets of `mask` containing its lowest node.
            let mut sub = mask;
            loop {
                if sub & low_bit != 0 && load_of[sub] <= cap {
                    let cand = self.tours.costs[wi][sub] + cost[mask ^ sub];
                    if cand < cost[mask] {
                        cost[mask] = cand;
                        choice[mask] = sub;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        let mut groups = Vec::new();
        let mut mask = full;
        while mask != 0 {
            let g = choice[mask];
            groups.push(g);
            mask ^= g;
        }
        groups.sort_unstable();
        (cost[full], groups)
    }

    /// Build the config for a per-commodity assignment vector.
    fn config(&self, code: u64, assign: Vec<u8>) -> Option<SideConfig> {
        let loads = self.group_loads(&assign)?;
        let routing = self.routing_cost(&loads);
        let w = self.inst.warehouses().len();
        let mut side_load = vec![0.0; w];
        let mut var_cost = 0.0;
        for (k, &wi) in assign.iter().enumerate() {
            let q = self.inst.commodity(k).quantity;
            side_load[wi as usize] += q;
            if self.kind == RouteKind::Collection {
                var_cost += self.inst.warehouse_unit_cost(self.inst.warehouses()[wi as usize]) * q;
            }
        }
        Some(SideConfig { code, assign, routing, var_cost, side_load })
    }

    /// Routes realizing an assignment, in (warehouse, group) order.
    fn routes(&self, assign: &[u8]) -> Vec<Route> {
        let loads = self.group_loads(assign).expect("feasible assignment");
        let mut routes = Vec::new();
        for (wi, &w) in self.inst.warehouses().iter().enumerate() {
            let mask = self.warehouse_mask(&loads, wi);
            if mask == 0 {
                continue;
            }
            let node_loads: Vec<f64> = (0..self.side_nodes.len()).map(|i| loads[i][wi]).collect();
            let (_, groups) = self.partition(wi, mask, &node_loads);
            for group in groups {
                let order = &self.tours.orders[wi][group];
                let visits = order
                    .iter()
                    .map(|&i| {
                        let node = self.side_nodes[i as usize];
                        SubNode {
                            node,
                            warehouse: w,
                            commodities: assign
                                .iter()
                                .enumerate()
                                .filter(|&(k, &a)| {
                                    a as usize == wi && self.endpoint[k] == i as usize
                                })
                                .map(|(k, _)| k)
                                .collect(),
                        }
                    })
                    .collect();
                routes.push(Route { warehouse: w, kind: self.kind, visits });
            }
        }
        routes
    }
}

/// Enumerate per-commodity assignment vectors, either freely or constrained
/// to one warehouse per side node (single allocation).
fn enumerate_configs(ctx: &SideContext, per_node: bool) -> Result<Vec<SideConfig>, OracleError> {
    let w = ctx.inst.warehouses().len() as u64;
    let k = ctx.endpoint.len();
    let digits = if per_node { ctx.side_nodes.len() } else { k };
    let total = (w as u128).checked_pow(digits as u32).unwrap_or(u128::MAX);
    if total > MAX_CONFIGS {
        return Err(OracleError::TooLarge {
            non_warehouse: ctx.inst.factories().len() + ctx.inst.customers().len(),
            warehouses: w as usize,
            max_non_warehouse: OracleLimits::default().max_non_warehouse,
            max_warehouses: OracleLimits::default().max_warehouses,
        });
    }
    let mut out = Vec::new();
    for code in 0..total as u64 {
        // Big-endian digits keep numeric order equal to lexicographic order.
        let mut digits_vec = vec![0u8; digits];
        let mut rest = code;
        for d in (0..digits).rev() {
            digits_vec[d] = (rest % w) as u8;
            rest /= w;
        }
        let assign: Vec<u8> = if per_node {
            (0..k).map(|i| digits_vec[ctx.endpoint[i]]).collect()
        } else {
            digits_vec
        };
        if let Some(cfg) = ctx.config(code, assign) {
            out.push(cfg);
        }
    }
    Ok(out)
}

pub fn brute_force_solve(
    inst: &Instance,
    cfg: VariantConfig,
) -> Result<(Solution, CostBreakdown), OracleError> {
    brute_force_solve_with_limits(inst, cfg, OracleLimits::default())
}

pub fn brute_force_solve_with_limits(
    inst: &Instance,
    cfg: VariantConfig,
    limits: OracleLimits,
) -> Result<(Solution, CostBreakdown), OracleError> {
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(OracleError::InvalidInstance(report.to_string()));
    }
    let non_warehouse = inst.factories().len() + inst.customers().len();
    let warehouses = inst.warehouses().len();
    if non_warehouse > limits.max_non_warehouse || warehouses > limits.max_warehouses {
        return Err(OracleError::TooLarge {
            non_warehouse,
            warehouses,
            max_non_warehouse: limits.max_non_warehouse,
            max_warehouses: limits.max_warehouses,
        });
    }
    if inst.commodities().is_empty() {
        let sol = Solution::empty();
        let cost = evaluate_objective(inst, &sol).expect("empty solution");
        return Ok((sol, cost));
    }
    if warehouses == 0 {
        return Err(OracleError::Infeasible {
            binding: "no warehouses available".to_string(),
        });
    }
    // A commodity heavier than one vehicle can never be collected.
    if let Some(c) = inst
        .commodities()
        .iter()
        .find(|c| c.quantity > inst.vehicle_capacity() + CAPACITY_TOLERANCE)
    {
        return Err(OracleError::Infeasible {
            binding: format!(
                "vehicle capacity {} cannot carry flow ({}, {}) of {}",
                inst.vehicle_capacity(),
                c.factory,
                c.customer,
                c.quantity
            ),
        });
    }

    let coll_ctx = SideContext::new(inst, RouteKind::Collection);
    let del_ctx = SideContext::new(inst, RouteKind::Delivery);
    let per_node = cfg == VariantConfig::WspsSa;

    let mut coll = enumerate_configs(&coll_ctx, per_node)?;
    coll.sort_by(|a, b| {
        (a.var_cost + a.routing)
            .partial_cmp(&(b.var_cost + b.routing))
            .unwrap()
            .then(a.code.cmp(&b.code))
    });

    let alpha = inst.alpha();
    let w_nodes = inst.warehouses();
    let quantities: Vec<f64> = inst.commodities().iter().map(|c| c.quantity).collect();
    let caps: Vec<f64> = w_nodes.iter().map(|&w| inst.warehouse_capacity(w)).collect();

    let mut best: Option<(f64, u64, u64, Vec<u8>, Vec<u8>)> = None;

    if cfg == VariantConfig::WspsWi {
        // Delivery follows collection exactly; no transfers.
        for m in &coll {
            let lower = m.var_cost + m.routing;
            if let Some((bt, ..)) = &best {
                if lower > *bt {
                    break;
                }
            }
            let Some(del_cfg) = del_ctx.config(m.code, m.assign.clone()) else {
                continue;
            };
            let total = lower + del_cfg.routing;
            let capacity_ok = m
                .side_load
                .iter()
                .zip(&caps)
                .all(|(load, cap)| *load <= cap + CAPACITY_TOLERANCE);
            if !capacity_ok {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bt, bm, bn, ..)) => {
                    total < *bt || (total == *bt && (m.code, m.code) < (*bm, *bn))
                }
            };
            if better {
                best = Some((total, m.code, m.code, m.assign.clone(), m.assign.clone()));
            }
        }
    } else {
        let mut del = enumerate_configs(&del_ctx, per_node)?;
        del.sort_by(|a, b| a.routing.partial_cmp(&b.routing).unwrap().then(a.code.cmp(&b.code)));
        let min_del = del.first().map(|d| d.routing).unwrap_or(f64::INFINITY);

        let mut inbound = vec![0.0; w_nodes.len()];
        for m in &coll {
            let base = m.var_cost + m.routing;
            if let Some((bt, ..)) = &best {
                if base + min_del > *bt {
                    break;
                }
            }
            for n in &del {
                let lower = base + n.routing;
                if let Some((bt, ..)) = &best {
                    if lower > *bt {
                        break;
                    }
                }
                inbound.copy_from_slice(&m.side_load);
                let mut transfer = 0.0;
                for k in 0..quantities.len() {
                    let (mi, ni) = (m.assign[k], n.assign[k]);
                    if mi != ni {
                        inbound[ni as usize] += quantities[k];
                        transfer += alpha
                            * inst.dist(w_nodes[mi as usize], w_nodes[ni as usize])
                            * quantities[k];
                    }
                }
                let total = lower + transfer;
                if let Some((bt, bm, bn, ..)) = &best {
                    if total > *bt || (total == *bt && (m.code, n.code) >= (*bm, *bn)) {
                        continue;
                    }
                }
                let capacity_ok = inbound
                    .iter()
                    .zip(&caps)
                    .all(|(load, cap)| *load <= cap + CAPACITY_TOLERANCE);
                if capacity_ok {
                    best = Some((total, m.code, n.code, m.assign.clone(), n.assign.clone()));
                }
            }
        }
    }

    let Some((_, _, _, coll_assign, del_assign)) = best else {
        return Err(OracleError::Infeasible {
            binding: infeasibility_binding(inst, &coll),
        });
    };

    let mut routes = Vec::new();
    let coll_routes = coll_ctx.routes(&coll_assign);
    let del_routes = del_ctx.routes(&del_assign);
    for &w in w_nodes {
        routes.extend(coll_routes.iter().filter(|r| r.warehouse == w).cloned());
        routes.extend(del_routes.iter().filter(|r| r.warehouse == w).cloned());
    }
    let assignment = CommodityAssignment {
        pairs: coll_assign
            .iter()
            .zip(&del_assign)
            .map(|(&m, &n)| (w_nodes[m as usize], w_nodes[n as usize]))
            .collect(),
    };
    let solution = Solution { routes, assignment };
    let cost = evaluate_objective(inst, &solution).expect("oracle solution evaluates");
    Ok((solution, cost))
}

fn infeasibility_binding(inst: &Instance, coll: &[SideConfig]) -> String {
    if coll.is_empty() {
        format!(
            "vehicle capacity {} admits no collection assignment",
            inst.vehicle_capacity()
        )
    } else {
        let total: f64 = inst.total_demand();
        let cap_sum: f64 = inst
            .warehouses()
            .iter()
            .map(|&w| inst.warehouse_capacity(w))
            .sum();
        format!(
            "warehouse capacities (sum {cap_sum}) cannot absorb total demand {total} \
             under the variant restrictions"
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;
    use crate::model::validate_solution;

    #[test]
    fn toy_optimum_matches_hand_evaluation() {
        let inst = toy_1w1f1c();
        for cfg in VariantConfig::all() {
            let (sol, cost) = brute_force_solve(&inst, cfg).unwrap();
            assert!((cost.total - 16.0).abs() < 1e-9, "{cfg}: {cost:?}");
            assert!(validate_solution(&inst, &sol, cfg).is_feasible());
        }
    }

    #[test]
    fn enumeration_guard_rejects_large_instances() {
        let inst = toy_1w1f1c();
        let err = brute_force_solve_with_limits(
            &inst,
            VariantConfig::Wspsdp,
            OracleLimits { max_non_warehouse: 1, max_warehouses: 3 },
        )
        .unwrap_err();
        assert!(matches!(err, OracleError::TooLarge { non_warehouse: 2, .. }));
    }

    #[test]
    fn oversized_commodity_is_infeasible() {
        let inst = toy_1w1f1c_with_flow(60.0);
        let err = brute_force_solve(&inst, VariantConfig::Wspsdp).unwrap_err();
        assert!(matches!(err, OracleError::Infeasible { .. }));
    }

    #[test]
    fn variants_are_relaxations_of_the_full_model() {
        let inst = two_by_two();
        let (_, full) = brute_force_solve(&inst, VariantConfig::Wspsdp).unwrap();
        let (_, sa) = brute_force_solve(&inst, VariantConfig::WspsSa).unwrap();
        let (_, wi) = brute_force_solve(&inst, VariantConfig::WspsWi).unwrap();
        assert!(full.total <= sa.total + 1e-9);
        assert!(full.total <= wi.total + 1e-9);
    }

    #[test]
    fn wi_optimum_has_no_transfers() {
        let inst = two_by_two();
        let (sol, cost) = brute_force_solve(&inst, VariantConfig::WspsWi).unwrap();
        assert_eq!(cost.inter_warehouse_cost, 0.0);
        assert!(validate_solution(&inst, &sol, VariantConfig::WspsWi).is_feasible());
    }

    #[test]
    fn empty_flow_instance_has_empty_optimum() {
        let inst = toy_no_flow();
        let (sol, cost) = brute_force_solve(&inst, VariantConfig::Wspsdp).unwrap();
        assert!(sol.routes.is_empty());
        assert_eq!(cost.total, 0.0);
    }
}
