//! Two-phase construction heuristic: greedy assignment of non-warehouse
//! nodes to warehouses, then nearest-neighbour route building per warehouse.

use crate::model::{
    validate_solution, CommodityAssignment, CommodityId, Instance, NodeId, Role, Route, RouteKind,
    Solution, SubNode, VariantConfig, CAPACITY_TOLERANCE,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignReason {
    /// Factory assigned whole to the cheapest warehouse with capacity.
    CheapestFeasible,
    /// Customer assigned whole to the nearest warehouse with capacity.
    Nearest,
    /// Commodity set split across warehouses because no single one fits.
    FallbackSplit,
    /// Customer side pinned to the collection warehouse (no-transfer variant).
    FollowsCollection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignEvent {
    pub node: NodeId,
    pub warehouse: NodeId,
    pub commodities: Vec<CommodityId>,
    pub reason: AssignReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteEvent {
    pub warehouse: NodeId,
    pub kind: RouteKind,
    pub visits: Vec<NodeId>,
}

/// Replayable record of every construction decision.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub assignments: Vec<AssignEvent>,
    pub routes: Vec<RouteEvent>,
}

impl ConstructionTrace {
    /// Rebuild the solution from the recorded decisions.
    pub fn replay(&self, inst: &Instance) -> Solution {
        let k = inst.commodities().len();
        let mut coll = vec![usize::MAX; k];
        let mut del = vec![usize::MAX; k];
        for ev in &self.assignments {
            let side = match inst.role(ev.node) {
                Role::Factory => &mut coll,
                _ => &mut del,
            };
            for &c in &ev.commodities {
                side[c] = ev.warehouse;
            }
        }
        let routes = self
            .routes
            .iter()
            .map(|ev| Route {
                warehouse: ev.warehouse,
                kind: ev.kind,
                visits: ev
                    .visits
                    .iter()
                    .map(|&node| {
                        let side = match ev.kind {
                            RouteKind::Collection => &coll,
                            RouteKind::Delivery => &del,
                        };
                        SubNode {
                            node,
                            warehouse: ev.warehouse,
                            commodities: inst
                                .commodities_of(node)
                                .iter()
                                .copied()
                                .filter(|&c| side[c] == ev.warehouse)
                                .collect(),
                        }
                    })
                    .collect(),
            })
            .collect();
        Solution {
            routes,
            assignment: CommodityAssignment {
                pairs: coll.into_iter().zip(del).collect(),
            },
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConstructionError {
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
    #[error("no warehouse can absorb node {node} (even after fallback splitting)")]
    Stuck { node: NodeId },
    #[error("commodity load {load} at node {node} exceeds vehicle capacity {capacity}")]
    UnsplittableLoad { node: NodeId, load: f64, capacity: f64 },
    #[error("constructed solution failed feasibility: {0}")]
    Infeasible(String),
}

/// Warehouse capacity bookkeeping under the once-per-touched-warehouse
/// inbound rule: a commodity consumes capacity at a warehouse the first time
/// either of its endpoints is assigned there.
struct CapacityLedger<'a> {
    inst: &'a Instance,
    collection: Vec<Option<NodeId>>,
    delivery: Vec<Option<NodeId>>,
    inbound: Vec<f64>,
}

impl<'a> CapacityLedger<'a> {
    fn new(inst: &'a Instance) -> Self {
        CapacityLedger {
            inst,
            collection: vec![None; inst.commodities().len()],
            delivery: vec![None; inst.commodities().len()],
            inbound: vec![0.0; inst.num_nodes()],
        }
    }

    fn other_side(&self, k: CommodityId, side: RouteKind) -> Option<NodeId> {
        match side {
            RouteKind::Collection => self.delivery[k],
            RouteKind::Delivery => self.collection[k],
        }
    }

    /// Capacity newly consumed at `w` if commodity `k`'s `side` lands there.
    fn marginal(&self, k: CommodityId, side: RouteKind, w: NodeId) -> f64 {
        if self.other_side(k, side) == Some(w) {
            0.0
        } else {
            self.inst.commodity(k).quantity
        }
    }

    fn headroom(&self, w: NodeId) -> f64 {
        self.inst.warehouse_capacity(w) - self.inbound[w] + CAPACITY_TOLERANCE
    }

    fn assign(&mut self, k: CommodityId, side: RouteKind, w: NodeId) {
        self.inbound[w] += self.marginal(k, side, w);
        match side {
            RouteKind::Collection => self.collection[k] = Some(w),
            RouteKind::Delivery => self.delivery[k] = Some(w),
        }
    }
}

fn side_of(role: Role) -> RouteKind {
    match role {
        Role::Factory => RouteKind::Collection,
        _ => RouteKind::Delivery,
    }
}

/// Build a feasible initial solution. The seed only breaks ties beyond the
/// lowest-id rule (none by default); it is threaded through for interface
/// uniformity with the search.
pub fn construct_initial(
    inst: &Instance,
    cfg: VariantConfig,
    _seed: u64,
) -> Result<(Solution, ConstructionTrace), ConstructionError> {
    let report = crate::model::validate_instance(inst);
    if !report.is_ok() {
        return Err(ConstructionError::InvalidInstance(report.to_string()));
    }

    let mut ledger = CapacityLedger::new(inst);
    let mut trace = ConstructionTrace::default();

    // Phase 1: assignment, picking the unassigned node with maximum demand.
    let mut pending: Vec<NodeId> = inst
        .factories()
        .iter()
        .chain(inst.customers())
        .copied()
        .filter(|&i| inst.node_demand(i) > 0.0)
        .collect();
    if cfg == VariantConfig::WspsWi {
        // Customers must follow their inbound commodities; assign factories
        // first, then derive the customer side.
        pending.retain(|&i| inst.role(i) == Role::Factory);
    }
    pending.sort_by(|&a, &b| {
        inst.node_demand(b)
            .partial_cmp(&inst.node_demand(a))
            .unwrap()
            .then(a.cmp(&b))
    });

    for node in pending {
        assign_node(inst, cfg, node, &mut ledger, &mut trace)?;
    }

    if cfg == VariantConfig::WspsWi {
        let mut customers: Vec<NodeId> = inst
            .customers()
            .iter()
            .copied()
            .filter(|&i| inst.node_demand(i) > 0.0)
            .collect();
        customers.sort_by(|&a, &b| {
            inst.node_demand(b)
                .partial_cmp(&inst.node_demand(a))
                .unwrap()
                .then(a.cmp(&b))
        });
        for node in customers {
            let mut groups: Vec<(NodeId, Vec<CommodityId>)> = Vec::new();
            for &k in inst.commodities_of(node) {
                let w = ledger.collection[k].expect("factories assigned first");
                match groups.iter_mut().find(|(g, _)| *g == w) {
                    Some((_, ks)) => ks.push(k),
                    None => groups.push((w, vec![k])),
                }
            }
            groups.sort_by_key(|(w, _)| *w);
            for (w, ks) in groups {
                let load: f64 = ks.iter().map(|&k| inst.commodity(k).quantity).sum();
                if load > inst.vehicle_capacity() + CAPACITY_TOLERANCE {
                    return Err(ConstructionError::UnsplittableLoad {
                        node,
                        load,
                        capacity: inst.vehicle_capacity(),
                    });
                }
                for &k in &ks {
                    ledger.assign(k, RouteKind::Delivery, w);
                }
                trace.assignments.push(AssignEvent {
                    node,
                    warehouse: w,
                    commodities: ks,
                    reason: AssignReason::FollowsCollection,
                });
            }
        }
    }

    // Phase 2: nearest-neighbour routes per warehouse and kind.
    let mut routes = Vec::new();
    for &w in inst.warehouses() {
        for kind in [RouteKind::Collection, RouteKind::Delivery] {
            let side = match kind {
                RouteKind::Collection => &ledger.collection,
                RouteKind::Delivery => &ledger.delivery,
            };
            // Sub-nodes at this warehouse: (node, commodity set, load).
            let mut sub_nodes: Vec<(NodeId, Vec<CommodityId>, f64)> = Vec::new();
            for (k, assigned) in side.iter().enumerate() {
                if *assigned != Some(w) {
                    continue;
                }
                let c = inst.commodity(k);
                let node = match kind {
                    RouteKind::Collection => c.factory,
                    RouteKind::Delivery => c.customer,
                };
                match sub_nodes.iter_mut().find(|(n, _, _)| *n == node) {
                    Some((_, ks, load)) => {
                        ks.push(k);
                        *load += c.quantity;
                    }
                    None => sub_nodes.push((node, vec![k], c.quantity)),
                }
            }
            sub_nodes.sort_by_key(|(n, _, _)| *n);
            for (node, _, load) in &sub_nodes {
                if *load > inst.vehicle_capacity() + CAPACITY_TOLERANCE {
                    return Err(ConstructionError::UnsplittableLoad {
                        node: *node,
                        load: *load,
                        capacity: inst.vehicle_capacity(),
                    });
                }
            }

            let mut unlinked: BTreeSet<usize> = (0..sub_nodes.len()).collect();
            while !unlinked.is_empty() {
                let mut current = w;
                let mut remaining = inst.vehicle_capacity() + CAPACITY_TOLERANCE;
                let mut visits = Vec::new();
                loop {
                    let next = unlinked
                        .iter()
                        .copied()
                        .filter(|&i| sub_nodes[i].2 <= remaining)
                        .min_by(|&a, &b| {
                            inst.dist(current, sub_nodes[a].0)
                                .partial_cmp(&inst.dist(current, sub_nodes[b].0))
                                .unwrap()
                                .then(sub_nodes[a].0.cmp(&sub_nodes[b].0))
                        });
                    match next {
                        Some(i) => {
                            unlinked.remove(&i);
                            remaining -= sub_nodes[i].2;
                            current = sub_nodes[i].0;
                            visits.push(i);
                        }
                        None => break,
                    }
                }
                trace.routes.push(RouteEvent {
                    warehouse: w,
                    kind,
                    visits: visits.iter().map(|&i| sub_nodes[i].0).collect(),
                });
                routes.push(Route {
                    warehouse: w,
                    kind,
                    visits: visits
                        .iter()
                        .map(|&i| SubNode {
                            node: sub_nodes[i].0,
                            warehouse: w,
                            commodities: sub_nodes[i].1.iter().copied().collect(),
                        })
                        .collect(),
                });
            }
        }
    }

    let solution = Solution {
        routes,
        assignment: CommodityAssignment {
            pairs: ledger
                .collection
                .iter()
                .zip(&ledger.delivery)
                .map(|(m, n)| (m.expect("assigned"), n.expect("assigned")))
                .collect(),
        },
    };

    let feas = validate_solution(inst, &solution, cfg);
    if !feas.is_feasible() {
        return Err(ConstructionError::Infeasible(feas.to_string()));
    }
    Ok((solution, trace))
}

/// Assign one node's commodity set, whole if possible, split as fallback.
fn assign_node(
    inst: &Instance,
    cfg: VariantConfig,
    node: NodeId,
    ledger: &mut CapacityLedger,
    trace: &mut ConstructionTrace,
) -> Result<(), ConstructionError> {
    let role = inst.role(node);
    let side = side_of(role);
    let commodities: Vec<CommodityId> = inst.commodities_of(node).to_vec();
    let demand = inst.node_demand(node);

    // Preference order: cheapest unit cost for factories, nearest for customers.
    let mut order: Vec<NodeId> = inst.warehouses().to_vec();
    match role {
        Role::Factory => order.sort_by(|&a, &b| {
            inst.warehouse_unit_cost(a)
                .partial_cmp(&inst.warehouse_unit_cost(b))
                .unwrap()
                .then(a.cmp(&b))
        }),
        _ => order.sort_by(|&a, &b| {
            inst.dist(a, node)
                .partial_cmp(&inst.dist(b, node))
                .unwrap()
                .then(a.cmp(&b))
        }),
    }

    // Whole-node assignment: enough capacity headroom and one-vehicle load.
    if demand <= inst.vehicle_capacity() + CAPACITY_TOLERANCE {
        for &w in &order {
            let needed: f64 = commodities.iter().map(|&k| ledger.marginal(k, side, w)).sum();
            if needed <= ledger.headroom(w) {
                for &k in &commodities {
                    ledger.assign(k, side, w);
                }
                trace.assignments.push(AssignEvent {
                    node,
                    warehouse: w,
                    commodities,
                    reason: match role {
                        Role::Factory => AssignReason::CheapestFeasible,
                        _ => AssignReason::Nearest,
                    },
                });
                return Ok(());
            }
        }
    }

    if cfg == VariantConfig::WspsSa {
        // Single allocation forbids splitting a node across warehouses.
        return Err(ConstructionError::Stuck { node });
    }

    // Fallback: split the commodity set greedily, largest commodity first.
    let mut by_size = commodities;
    by_size.sort_by(|&a, &b| {
        inst.commodity(b)
            .quantity
            .partial_cmp(&inst.commodity(a).quantity)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut groups: Vec<(NodeId, Vec<CommodityId>, f64)> =
        order.iter().map(|&w| (w, Vec::new(), 0.0)).collect();
    for k in by_size {
        let q = inst.commodity(k).quantity;
        if q > inst.vehicle_capacity() + CAPACITY_TOLERANCE {
            return Err(ConstructionError::UnsplittableLoad {
                node,
                load: q,
                capacity: inst.vehicle_capacity(),
            });
        }
        let slot = groups.iter_mut().find(|(w, _, load)| {
            ledger.marginal(k, side, *w) <= ledger.headroom(*w)
                && load + q <= inst.vehicle_capacity() + CAPACITY_TOLERANCE
        });
        match slot {
            Some((w, ks, load)) => {
                ledger.assign(k, side, *w);
                ks.push(k);
                *load += q;
            }
            None => return Err(ConstructionError::Stuck { node }),
        }
    }
    for (w, ks, _) in groups {
        if !ks.is_empty() {
            trace.assignments.push(AssignEvent {
                node,
                warehouse: w,
                commodities: ks,
                reason: AssignReason::FallbackSplit,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;
    use crate::model::{evaluate_objective, Node, Warehouse};

    #[test]
    fn unique_toy_solution() {
        let inst = toy_1w1f1c();
        for cfg in VariantConfig::all() {
            let (sol, _) = construct_initial(&inst, cfg, 0).unwrap();
            assert_eq!(sol.routes.len(), 2);
            let cost = evaluate_objective(&inst, &sol).unwrap();
            assert!((cost.total - 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn max_demand_factory_takes_cheapest_warehouse() {
        // w0 (a=0.1, Q=100), w1 (a=0.3, Q=100); f2 demand 60, f3 demand 50.
        // f2 goes first to w0; f3 no longer fits w0 (residual 40) -> w1.
        // Each customer sits nearest to its factory's warehouse so the
        // interleaved customer picks consume no transfer headroom.
        let inst = Instance::new(
            vec![
                Node { id: 0, role: Role::Warehouse, x: None, y: None },
                Node { id: 1, role: Role::Warehouse, x: None, y: None },
                Node { id: 2, role: Role::Factory, x: None, y: None },
                Node { id: 3, role: Role::Factory, x: None, y: None },
                Node { id: 4, role: Role::Customer, x: None, y: None },
                Node { id: 5, role: Role::Customer, x: None, y: None },
            ],
            vec![
                vec![0.0, 9.0, 2.0, 4.0, 4.0, 7.0],
                vec![9.0, 0.0, 8.0, 3.0, 5.0, 2.0],
                vec![2.0, 8.0, 0.0, 5.0, 6.0, 9.0],
                vec![4.0, 3.0, 5.0, 0.0, 5.0, 4.0],
                vec![4.0, 5.0, 6.0, 5.0, 0.0, 3.0],
                vec![7.0, 2.0, 9.0, 4.0, 3.0, 0.0],
            ],
            vec![(2, 4, 60.0), (3, 5, 50.0)],
            vec![
                Warehouse { id: 0, capacity: 100.0, unit_cost: 0.1 },
                Warehouse { id: 1, capacity: 100.0, unit_cost: 0.3 },
            ],
            60.0,
            0.001,
            1.0,
        );
        let (sol, trace) = construct_initial(&inst, VariantConfig::Wspsdp, 0).unwrap();
        assert_eq!(sol.assignment.collection(0), 0); // f2 -> w0
        assert_eq!(sol.assignment.collection(1), 1); // f3 -> w1
        assert_eq!(trace.assignments[0].node, 2);
        assert_eq!(trace.assignments[0].reason, AssignReason::CheapestFeasible);
    }

    #[test]
    fn near_customers_share_one_route_when_they_fit() {
        // Two customers nearest to w1, loads 10 each, vehicle capacity 50:
        // both assigned to w1 and linked into a single delivery route.
        let inst = two_by_two();
        let (sol, _) = construct_initial(&inst, VariantConfig::Wspsdp, 0).unwrap();
        for cfg in VariantConfig::all() {
            let (s, _) = construct_initial(&inst, cfg, 0).unwrap();
            assert!(validate_solution(&inst, &s, cfg).is_feasible());
        }
        let delivery_routes: Vec<_> = sol
            .routes
            .iter()
            .filter(|r| r.kind == RouteKind::Delivery && !r.visits.is_empty())
            .collect();
        let total_visits: usize = delivery_routes.iter().map(|r| r.visits.len()).sum();
        assert_eq!(total_visits, 2);
    }

    #[test]
    fn zero_demand_nodes_are_not_routed() {
        let inst = toy_no_flow();
        let (sol, _) = construct_initial(&inst, VariantConfig::Wspsdp, 0).unwrap();
        assert!(sol.routes.is_empty());
        assert!(sol.assignment.is_empty());
    }

    #[test]
    fn trace_replay_reproduces_solution() {
        let inst = two_by_two();
        for cfg in VariantConfig::all() {
            let (sol, trace) = construct_initial(&inst, cfg, 0).unwrap();
            assert_eq!(trace.replay(&inst), sol);
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let inst = two_by_two();
        let a = construct_initial(&inst, VariantConfig::Wspsdp, 1).unwrap();
        let b = construct_initial(&inst, VariantConfig::Wspsdp, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capacity_forces_split_under_wspsdp_and_fails_under_sa() {
        // One factory with demand 40 shipping to two customers; each
        // warehouse holds only 25: the factory must split.
        let inst = Instance::new(
            vec![
                Node { id: 0, role: Role::Warehouse, x: None, y: None },
                Node { id: 1, role: Role::Warehouse, x: None, y: None },
                Node { id: 2, role: Role::Factory, x: None, y: None },
                Node { id: 3, role: Role::Customer, x: None, y: None },
                Node { id: 4, role: Role::Customer, x: None, y: None },
            ],
            vec![
                vec![0.0, 5.0, 3.0, 4.0, 6.0],
                vec![5.0, 0.0, 6.0, 2.0, 3.0],
                vec![3.0, 6.0, 0.0, 7.0, 8.0],
                vec![4.0, 2.0, 7.0, 0.0, 2.0],
                vec![6.0, 3.0, 8.0, 2.0, 0.0],
            ],
            vec![(2, 3, 22.0), (2, 4, 18.0)],
            vec![
                Warehouse { id: 0, capacity: 25.0, unit_cost: 0.2 },
                Warehouse { id: 1, capacity: 25.0, unit_cost: 0.25 },
            ],
            50.0,
            0.0,
            1.0,
        );
        let (sol, trace) = construct_initial(&inst, VariantConfig::Wspsdp, 0).unwrap();
        assert!(validate_solution(&inst, &sol, VariantConfig::Wspsdp).is_feasible());
        assert!(trace
            .assignments
            .iter()
            .any(|e| e.reason == AssignReason::FallbackSplit));
        assert_eq!(
            construct_initial(&inst, VariantConfig::WspsSa, 0).unwrap_err(),
            ConstructionError::Stuck { node: 2 }
        );
    }
}
