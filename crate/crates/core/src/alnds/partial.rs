//! Partially destroyed solutions: routes with a pool of removed sub-nodes
//! awaiting reinsertion, plus capacity bookkeeping.

use crate::model::{
    CommodityAssignment, CommodityId, Instance, NodeId, Route, RouteKind, Solution, SubNode,
    CAPACITY_TOLERANCE,
};
use std::collections::BTreeSet;

/// A sub-node lifted out of its route, carrying the commodities to reinsert.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovedItem {
    pub node: NodeId,
    pub kind: RouteKind,
    pub commodities: BTreeSet<CommodityId>,
    /// Warehouse the item was removed from; repairs under the routing
    /// subproblem must reinsert here.
    pub origin: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialSolution {
    pub routes: Vec<Route>,
    /// Collection warehouse per commodity, `None` while in the pool.
    pub collection: Vec<Option<NodeId>>,
    /// Delivery warehouse per commodity, `None` while in the pool.
    pub delivery: Vec<Option<NodeId>>,
    pub pool: Vec<RemovedItem>,
    /// Warehouses repairs may insert into.
    pub open_warehouses: BTreeSet<NodeId>,
    /// Routing-subproblem restriction: items go back to their origin.
    pub lock_warehouse: bool,
    /// Inbound flow per warehouse under the count-once rule.
    inbound: Vec<f64>,
}

impl PartialSolution {
    pub fn from_solution(inst: &Instance, sol: &Solution, open: &BTreeSet<NodeId>) -> Self {
        let k = inst.commodities().len();
        let mut collection = vec![None; k];
        let mut delivery = vec![None; k];
        for (i, &(m, n)) in sol.assignment.pairs.iter().enumerate() {
            collection[i] = Some(m);
            delivery[i] = Some(n);
        }
        let mut partial = PartialSolution {
            routes: sol.routes.clone(),
            collection,
            delivery,
            pool: Vec::new(),
            open_warehouses: open.clone(),
            lock_warehouse: false,
            inbound: vec![0.0; inst.num_nodes()],
        };
        for i in 0..k {
            let q = inst.commodity(i).quantity;
            if let Some(m) = partial.collection[i] {
                partial.inbound[m] += q;
            }
            if let Some(n) = partial.delivery[i] {
                if partial.collection[i] != Some(n) {
                    partial.inbound[n] += q;
                }
            }
        }
        partial
    }

    /// Complete partial back into a solution; `None` while anything is
    /// unassigned.
    pub fn into_solution(self) -> Option<Solution> {
        if !self.pool.is_empty() {
            return None;
        }
        let mut pairs = Vec::with_capacity(self.collection.len());
        for (m, n) in self.collection.iter().zip(&self.delivery) {
            pairs.push(((*m)?, (*n)?));
        }
        Some(Solution {
            routes: self.routes.into_iter().filter(|r| !r.visits.is_empty()).collect(),
            assignment: CommodityAssignment { pairs },
        })
    }

    fn side_mut(&mut self, kind: RouteKind) -> &mut Vec<Option<NodeId>> {
        match kind {
            RouteKind::Collection => &mut self.collection,
            RouteKind::Delivery => &mut self.delivery,
        }
    }

    pub fn side(&self, kind: RouteKind) -> &[Option<NodeId>] {
        match kind {
            RouteKind::Collection => &self.collection,
            RouteKind::Delivery => &self.delivery,
        }
    }

    pub fn other_side(&self, k: CommodityId, kind: RouteKind) -> Option<NodeId> {
        match kind {
            RouteKind::Collection => self.delivery[k],
            RouteKind::Delivery => self.collection[k],
        }
    }

    /// Capacity consumed at `w` if commodity `k`'s `kind` side lands there.
    pub fn marginal(&self, inst: &Instance, k: CommodityId, kind: RouteKind, w: NodeId) -> f64 {
        if self.other_side(k, kind) == Some(w) {
            0.0
        } else {
            inst.commodity(k).quantity
        }
    }

    pub fn headroom(&self, inst: &Instance, w: NodeId) -> f64 {
        inst.warehouse_capacity(w) - self.inbound[w] + CAPACITY_TOLERANCE
    }

    pub fn inbound(&self, w: NodeId) -> f64 {
        self.inbound[w]
    }

    pub(crate) fn unassign_commodity(&mut self, inst: &Instance, k: CommodityId, kind: RouteKind) {
        let other = self.other_side(k, kind);
        if let Some(w) = self.side_mut(kind)[k].take() {
            if other != Some(w) {
                self.inbound[w] -= inst.commodity(k).quantity;
            }
        }
    }

    pub(crate) fn assign(&mut self, inst: &Instance, k: CommodityId, kind: RouteKind, w: NodeId) {
        self.inbound[w] += self.marginal(inst, k, kind, w);
        self.side_mut(kind)[k] = Some(w);
    }

    /// All sub-node identities currently on routes, in route order.
    pub fn sub_node_identities(&self) -> Vec<(NodeId, NodeId, RouteKind)> {
        self.routes
            .iter()
            .flat_map(|r| r.visits.iter().map(|v| (v.node, v.warehouse, r.kind)))
            .collect()
    }

    pub fn num_sub_nodes(&self) -> usize {
        self.routes.iter().map(|r| r.visits.len()).sum()
    }

    pub fn find_visit(
        &self,
        node: NodeId,
        warehouse: NodeId,
        kind: RouteKind,
    ) -> Option<(usize, usize)> {
        for (ri, r) in self.routes.iter().enumerate() {
            if r.kind != kind || r.warehouse != warehouse {
                continue;
            }
            for (vi, v) in r.visits.iter().enumerate() {
                if v.node == node {
                    return Some((ri, vi));
                }
            }
        }
        None
    }

    /// Lift a sub-node off its route into the pool. Empty routes are dropped.
    pub fn remove_sub_node(
        &mut self,
        inst: &Instance,
        node: NodeId,
        warehouse: NodeId,
        kind: RouteKind,
    ) -> Option<RemovedItem> {
        let (ri, vi) = self.find_visit(node, warehouse, kind)?;
        let visit = self.routes[ri].visits.remove(vi);
        if self.routes[ri].visits.is_empty() {
            self.routes.remove(ri);
        }
        for &k in &visit.commodities {
            self.unassign_commodity(inst, k, kind);
        }
        let item = RemovedItem {
            node,
            kind,
            commodities: visit.commodities,
            origin: warehouse,
        };
        self.pool.push(item.clone());
        Some(item)
    }

    /// Lift one commodity out of its sub-node on the given side. The
    /// sub-node keeps its other commodities; emptied sub-nodes leave the
    /// route. Returns `false` when the side is unassigned.
    pub fn remove_commodity(&mut self, inst: &Instance, k: CommodityId, kind: RouteKind) -> bool {
        let Some(w) = self.side(kind)[k] else {
            return false;
        };
        let c = inst.commodity(k);
        let node = match kind {
            RouteKind::Collection => c.factory,
            RouteKind::Delivery => c.customer,
        };
        let Some((ri, vi)) = self.find_visit(node, w, kind) else {
            return false;
        };
        self.routes[ri].visits[vi].commodities.remove(&k);
        if self.routes[ri].visits[vi].commodities.is_empty() {
            self.routes[ri].visits.remove(vi);
            if self.routes[ri].visits.is_empty() {
                self.routes.remove(ri);
            }
        }
        self.unassign_commodity(inst, k, kind);
        self.pool.push(RemovedItem {
            node,
            kind,
            commodities: std::iter::once(k).collect(),
            origin: w,
        });
        true
    }

    /// The saving obtained by deleting a sub-node: removed detour plus the
    /// variable and transfer costs its assigned commodities stop paying.
    pub fn removal_saving(&self, inst: &Instance, ri: usize, vi: usize) -> f64 {
        let route = &self.routes[ri];
        let visit = &route.visits[vi];
        let prev = if vi == 0 { route.warehouse } else { route.visits[vi - 1].node };
        let next = if vi + 1 == route.visits.len() {
            route.warehouse
        } else {
            route.visits[vi + 1].node
        };
        let mut saving = inst.beta()
            * (inst.dist(prev, visit.node) + inst.dist(visit.node, next) - inst.dist(prev, next));
        for &k in &visit.commodities {
            let q = inst.commodity(k).quantity;
            match route.kind {
                RouteKind::Collection => {
                    saving += inst.warehouse_unit_cost(visit.warehouse) * q;
                    if let Some(n) = self.delivery[k] {
                        saving += inst.alpha() * inst.dist(visit.warehouse, n) * q;
                    }
                }
                RouteKind::Delivery => {
                    if let Some(m) = self.collection[k] {
                        saving += inst.alpha() * inst.dist(m, visit.warehouse) * q;
                    }
                }
            }
        }
        saving
    }

    pub fn route_load(&self, inst: &Instance, ri: usize) -> f64 {
        self.routes[ri].load(inst)
    }
}

/// Build a sub-node for insertion.
pub(crate) fn make_sub_node(item: &RemovedItem, warehouse: NodeId) -> SubNode {
    SubNode {
        node: item.node,
        warehouse,
        commodities: item.commodities.clone(),
    }
}
