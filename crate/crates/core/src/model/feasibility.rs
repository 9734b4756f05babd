//! Feasibility certification of solutions against the model constraints and
//! the variant restrictions.

use super::evaluate::VariantConfig;
use super::instance::{CommodityId, Instance, NodeId, Role};
use super::solution::{RouteKind, Solution};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Absolute slack allowed on capacity checks (flow units).
pub const CAPACITY_TOLERANCE: f64 = 1e-6;

/// One violated solution constraint. The `constraint` numbers follow the
/// model formulation; structural and variant checks carry their own tags.
#[derive(Clone, Debug, PartialEq)]
pub enum SolutionViolation {
    /// (2) The assignment does not cover every positive commodity exactly once.
    AssignmentIncomplete { got: usize, expected: usize },
    /// (2) A commodity is assigned to a node that is not a warehouse.
    AssignmentNotWarehouse { commodity: CommodityId, node: NodeId },
    /// (3) Warehouse inbound flow exceeds its capacity.
    WarehouseOverCapacity { warehouse: NodeId, inbound: f64, capacity: f64 },
    /// (4) A node with positive flow is never visited.
    NodeNotVisited { node: NodeId },
    /// (5) A (node, warehouse) pairing is visited by more than one vehicle.
    DuplicateSubNode { node: NodeId, warehouse: NodeId, kind: RouteKind },
    /// (7)/(8) A commodity's assigned sub-node is missing or does not carry it.
    SubNodeInconsistent { commodity: CommodityId, node: NodeId, warehouse: NodeId, kind: RouteKind },
    /// (9) A route visits a node of the wrong role for its kind.
    WrongRoleOnRoute { route: usize, node: NodeId, role: Role, kind: RouteKind },
    /// (10) A warehouse appears among a route's visits.
    WarehouseOnRoute { route: usize, node: NodeId },
    /// (13) A route's load exceeds the vehicle capacity.
    VehicleOverCapacity { route: usize, load: f64, capacity: f64 },
    /// Structural: a route starts from a non-warehouse node.
    RouteFromNonWarehouse { route: usize, node: NodeId },
    /// Structural: a visit's warehouse field differs from its route's.
    VisitWarehouseMismatch { route: usize, node: NodeId, warehouse: NodeId },
    /// Structural: a sub-node has an empty commodity set.
    EmptySubNode { node: NodeId, warehouse: NodeId },
    /// Structural: a sub-node carries a commodity that does not end at its node.
    CommodityEndpointMismatch { commodity: CommodityId, node: NodeId },
    /// Structural: a sub-node carries a commodity assigned to another warehouse.
    CommodityWarehouseMismatch { commodity: CommodityId, node: NodeId, warehouse: NodeId },
    /// Structural: a reference to a node or commodity outside the instance.
    DanglingReference { detail: String },
    /// Variant (SA): a non-warehouse node is served via two or more warehouses.
    MultiAllocatedNode { node: NodeId, warehouses: Vec<NodeId> },
    /// Variant (WI): a commodity uses distinct collection/delivery warehouses.
    TransferForbidden { commodity: CommodityId, collection: NodeId, delivery: NodeId },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SolutionViolation::*;
        match self {
            AssignmentIncomplete { got, expected } => {
                write!(f, "(2) assignment covers {got} of {expected} commodities")
            }
            AssignmentNotWarehouse { commodity, node } => {
                write!(f, "(2) commodity {commodity} assigned to non-warehouse {node}")
            }
            WarehouseOverCapacity { warehouse, inbound, capacity } => write!(
                f,
                "(3) warehouse {warehouse} inbound {inbound} exceeds capacity {capacity}"
            ),
            NodeNotVisited { node } => write!(f, "(4) node {node} with positive flow not visited"),
            DuplicateSubNode { node, warehouse, kind } => write!(
                f,
                "(5) ({node}, {warehouse}) visited by more than one {kind:?} vehicle"
            ),
            SubNodeInconsistent { commodity, node, warehouse, kind } => write!(
                f,
                "(7/8) commodity {commodity} expects a {kind:?} sub-node ({node}, {warehouse}) carrying it"
            ),
            WrongRoleOnRoute { route, node, role, kind } => write!(
                f,
                "(9) route {route} ({kind:?}) visits {role} node {node}"
            ),
            WarehouseOnRoute { route, node } => {
                write!(f, "(10) route {route} visits warehouse {node}")
            }
            VehicleOverCapacity { route, load, capacity } => write!(
                f,
                "(13) route {route} load {load} exceeds vehicle capacity {capacity}"
            ),
            RouteFromNonWarehouse { route, node } => {
                write!(f, "route {route} starts from non-warehouse {node}")
            }
            VisitWarehouseMismatch { route, node, warehouse } => write!(
                f,
                "route {route}: visit ({node}, {warehouse}) disagrees with route warehouse"
            ),
            EmptySubNode { node, warehouse } => {
                write!(f, "sub-node ({node}, {warehouse}) carries no commodities")
            }
            CommodityEndpointMismatch { commodity, node } => {
                write!(f, "commodity {commodity} does not end at node {node}")
            }
            CommodityWarehouseMismatch { commodity, node, warehouse } => write!(
                f,
                "commodity {commodity} at sub-node ({node}, {warehouse}) is assigned elsewhere"
            ),
            DanglingReference { detail } => write!(f, "dangling reference: {detail}"),
            MultiAllocatedNode { node, warehouses } => {
                write!(f, "(SA) multi-allocated node {node} via {warehouses:?}")
            }
            TransferForbidden { commodity, collection, delivery } => write!(
                f,
                "(WI) commodity {commodity} transfers from {collection} to {delivery}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<SolutionViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "feasible")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Check a solution against constraints (2)-(13) and the variant restrictions.
///
/// Constraint (6), vehicle flow conservation, holds structurally: routes are
/// closed tours by representation. Capacity checks allow
/// [`CAPACITY_TOLERANCE`] of absolute slack.
pub fn validate_solution(
    inst: &Instance,
    sol: &Solution,
    cfg: VariantConfig,
) -> FeasibilityReport {
    let mut out = Vec::new();
    let n = inst.num_nodes();
    let num_commodities = inst.commodities().len();

    // (2) every positive commodity carries exactly one warehouse pair.
    if sol.assignment.len() != num_commodities {
        out.push(SolutionViolation::AssignmentIncomplete {
            got: sol.assignment.len(),
            expected: num_commodities,
        });
    }
    for (k, &(m, w_del)) in sol.assignment.pairs.iter().enumerate().take(num_commodities) {
        for w in [m, w_del] {
            if w >= n || inst.role(w) != Role::Warehouse {
                out.push(SolutionViolation::AssignmentNotWarehouse { commodity: k, node: w });
            }
        }
    }

    // Route structure: (9), (10), (13), start node, per-visit consistency.
    let mut sub_node_seen: HashMap<(NodeId, NodeId, RouteKind), usize> = HashMap::new();
    let mut carried: HashMap<(CommodityId, RouteKind), (NodeId, NodeId)> = HashMap::new();
    for (ri, route) in sol.routes.iter().enumerate() {
        if route.warehouse >= n {
            out.push(SolutionViolation::DanglingReference {
                detail: format!("route {ri} warehouse {}", route.warehouse),
            });
            continue;
        }
        if inst.role(route.warehouse) != Role::Warehouse {
            out.push(SolutionViolation::RouteFromNonWarehouse {
                route: ri,
                node: route.warehouse,
            });
        }
        let mut load = 0.0;
        for v in &route.visits {
            if v.node >= n {
                out.push(SolutionViolation::DanglingReference {
                    detail: format!("route {ri} visit node {}", v.node),
                });
                continue;
            }
            let role = inst.role(v.node);
            if role == Role::Warehouse {
                out.push(SolutionViolation::WarehouseOnRoute { route: ri, node: v.node });
            } else {
                let expected = match route.kind {
                    RouteKind::Collection => Role::Factory,
                    RouteKind::Delivery => Role::Customer,
                };
                if role != expected {
                    out.push(SolutionViolation::WrongRoleOnRoute {
                        route: ri,
                        node: v.node,
                        role,
                        kind: route.kind,
                    });
                }
            }
            if v.warehouse != route.warehouse {
                out.push(SolutionViolation::VisitWarehouseMismatch {
                    route: ri,
                    node: v.node,
                    warehouse: v.warehouse,
                });
            }
            if v.commodities.is_empty() {
                out.push(SolutionViolation::EmptySubNode { node: v.node, warehouse: v.warehouse });
            }
            let count = sub_node_seen
                .entry((v.node, v.warehouse, route.kind))
                .or_insert(0);
            *count += 1;
            if *count == 2 {
                out.push(SolutionViolation::DuplicateSubNode {
                    node: v.node,
                    warehouse: v.warehouse,
                    kind: route.kind,
                });
            }
            for &k in &v.commodities {
                if k >= num_commodities {
                    out.push(SolutionViolation::DanglingReference {
                        detail: format!("commodity {k} at node {}", v.node),
                    });
                    continue;
                }
                let c = inst.commodity(k);
                let endpoint = match route.kind {
                    RouteKind::Collection => c.factory,
                    RouteKind::Delivery => c.customer,
                };
                if endpoint != v.node {
                    out.push(SolutionViolation::CommodityEndpointMismatch {
                        commodity: k,
                        node: v.node,
                    });
                }
                if k < sol.assignment.len() {
                    let assigned = match route.kind {
                        RouteKind::Collection => sol.assignment.collection(k),
                        RouteKind::Delivery => sol.assignment.delivery(k),
                    };
                    if assigned != v.warehouse {
                        out.push(SolutionViolation::CommodityWarehouseMismatch {
                            commodity: k,
                            node: v.node,
                            warehouse: v.warehouse,
                        });
                    }
                }
                carried.insert((k, route.kind), (v.node, v.warehouse));
                load += c.quantity;
            }
        }
        if load > inst.vehicle_capacity() + CAPACITY_TOLERANCE {
            out.push(SolutionViolation::VehicleOverCapacity {
                route: ri,
                load,
                capacity: inst.vehicle_capacity(),
            });
        }
    }

    // (7)/(8) each assigned commodity is carried by its two sub-nodes.
    for (k, &(m, w_del)) in sol.assignment.pairs.iter().enumerate().take(num_commodities) {
        let c = inst.commodity(k);
        let expect = [
            (RouteKind::Collection, c.factory, m),
            (RouteKind::Delivery, c.customer, w_del),
        ];
        for (kind, node, warehouse) in expect {
            if carried.get(&(k, kind)) != Some(&(node, warehouse)) {
                out.push(SolutionViolation::SubNodeInconsistent {
                    commodity: k,
                    node,
                    warehouse,
                    kind,
                });
            }
        }
    }

    // (4) every node with positive flow is visited at least once.
    let visited: BTreeSet<NodeId> = sol
        .routes
        .iter()
        .flat_map(|r| r.visits.iter().map(|v| v.node))
        .collect();
    for node in inst.factories().iter().chain(inst.customers()) {
        if inst.node_demand(*node) > 0.0 && !visited.contains(node) {
            out.push(SolutionViolation::NodeNotVisited { node: *node });
        }
    }

    // (3) warehouse inbound within capacity.
    if sol.assignment.len() == num_commodities {
        for (&w, &inbound) in &sol.warehouse_inbound(inst) {
            if w < n && inst.role(w) == Role::Warehouse {
                let cap = inst.warehouse_capacity(w);
                if inbound > cap + CAPACITY_TOLERANCE {
                    out.push(SolutionViolation::WarehouseOverCapacity {
                        warehouse: w,
                        inbound,
                        capacity: cap,
                    });
                }
            }
        }
    }

    // Variant restrictions.
    match cfg {
        VariantConfig::Wspsdp => {}
        VariantConfig::WspsSa => {
            for (node, ws) in sol.warehouses_per_node() {
                if ws.len() >= 2 {
                    out.push(SolutionViolation::MultiAllocatedNode {
                        node,
                        warehouses: ws.into_iter().collect(),
                    });
                }
            }
        }
        VariantConfig::WspsWi => {
            for (k, &(m, w_del)) in sol.assignment.pairs.iter().enumerate().take(num_commodities) {
                if m != w_del {
                    out.push(SolutionViolation::TransferForbidden {
                        commodity: k,
                        collection: m,
                        delivery: w_del,
                    });
                }
            }
        }
    }

    FeasibilityReport { violations: out }
}
