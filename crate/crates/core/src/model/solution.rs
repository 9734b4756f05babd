//! Solution representation: typed local routes of sub-nodes plus the
//! commodity-to-warehouse-pair assignment.

use super::instance::{CommodityId, Instance, NodeId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteKind {
    Collection,
    Delivery,
}

/// A (physical node, warehouse) pairing carrying part of the node's commodity
/// set. Multiple sub-nodes of one node at distinct warehouses realize
/// multi-allocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubNode {
    pub node: NodeId,
    pub warehouse: NodeId,
    pub commodities: BTreeSet<CommodityId>,
}

impl SubNode {
    pub fn load(&self, inst: &Instance) -> f64 {
        self.commodities
            .iter()
            .map(|&k| inst.commodity(k).quantity)
            .sum()
    }
}

/// A closed vehicle tour from a warehouse visiting factory sub-nodes only
/// (collection) or customer sub-nodes only (delivery).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub warehouse: NodeId,
    pub kind: RouteKind,
    pub visits: Vec<SubNode>,
}

impl Route {
    pub fn load(&self, inst: &Instance) -> f64 {
        self.visits.iter().map(|v| v.load(inst)).sum()
    }

    /// Tour length including the warehouse-to-first and last-to-warehouse arcs.
    pub fn length(&self, inst: &Instance) -> f64 {
        if self.visits.is_empty() {
            return 0.0;
        }
        let mut prev = self.warehouse;
        let mut total = 0.0;
        for v in &self.visits {
            total += inst.dist(prev, v.node);
            prev = v.node;
        }
        total + inst.dist(prev, self.warehouse)
    }
}

/// Per-commodity (collection warehouse, delivery warehouse) pair, indexed by
/// [`CommodityId`].
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommodityAssignment {
    pub pairs: Vec<(NodeId, NodeId)>,
}

impl CommodityAssignment {
    pub fn collection(&self, k: CommodityId) -> NodeId {
        self.pairs[k].0
    }

    pub fn delivery(&self, k: CommodityId) -> NodeId {
        self.pairs[k].1
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub assignment: CommodityAssignment,
}

impl Solution {
    /// The empty solution for an instance without commodities.
    pub fn empty() -> Self {
        Solution {
            routes: Vec::new(),
            assignment: CommodityAssignment::default(),
        }
    }

    /// Warehouses that currently carry at least one sub-node.
    pub fn used_warehouses(&self) -> BTreeSet<NodeId> {
        self.routes
            .iter()
            .filter(|r| !r.visits.is_empty())
            .map(|r| r.warehouse)
            .collect()
    }

    /// Position of the sub-node `(node, warehouse)` on a route of `kind`.
    pub fn find_sub_node(
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
                if v.node == node && v.warehouse == warehouse {
                    return Some((ri, vi));
                }
            }
        }
        None
    }

    /// Warehouses serving each physical node, across both route kinds.
    pub fn warehouses_per_node(&self) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
        let mut map: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for r in &self.routes {
            for v in &r.visits {
                map.entry(v.node).or_default().insert(v.warehouse);
            }
        }
        map
    }

    /// Inbound flow per warehouse: a commodity counts once at every warehouse
    /// it touches (collection origin or delivery endpoint).
    pub fn warehouse_inbound(&self, inst: &Instance) -> BTreeMap<NodeId, f64> {
        let mut inbound: BTreeMap<NodeId, f64> = BTreeMap::new();
        for (k, &(m, n)) in self.assignment.pairs.iter().enumerate() {
            let q = inst.commodity(k).quantity;
            *inbound.entry(m).or_default() += q;
            if n != m {
                *inbound.entry(n).or_default() += q;
            }
        }
        inbound
    }
}

/// Number of distinct physical nodes served through two or more warehouses.
pub fn count_multi_allocation_nodes(sol: &Solution) -> usize {
    sol.warehouses_per_node()
        .values()
        .filter(|ws| ws.len() >= 2)
        .count()
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("solution references node {0} absent from the instance")]
    UnknownNode(NodeId),
    #[error("solution references commodity {0} absent from the instance")]
    UnknownCommodity(CommodityId),
    #[error("route not part of the given solution")]
    ForeignRoute,
    #[error("assignment covers {got} commodities, instance has {expected}")]
    AssignmentLength { got: usize, expected: usize },
}

/// Cumulative collection load after each visit, or remaining delivery load
/// just before each visit.
pub fn route_load_profile(
    inst: &Instance,
    route: &Route,
    sol: &Solution,
) -> Result<Vec<f64>, ModelError> {
    if !sol.routes.iter().any(|r| r == route) {
        return Err(ModelError::ForeignRoute);
    }
    for v in &route.visits {
        if v.node >= inst.num_nodes() {
            return Err(ModelError::UnknownNode(v.node));
        }
        for &k in &v.commodities {
            if k >= inst.commodities().len() {
                return Err(ModelError::UnknownCommodity(k));
            }
        }
    }
    let loads: Vec<f64> = route.visits.iter().map(|v| v.load(inst)).collect();
    let profile = match route.kind {
        RouteKind::Collection => {
            let mut acc = 0.0;
            loads
                .iter()
                .map(|l| {
                    acc += l;
                    acc
                })
                .collect()
        }
        RouteKind::Delivery => {
            let mut remaining: f64 = loads.iter().sum();
            loads
                .iter()
                .map(|l| {
                    let before = remaining;
                    remaining -= l;
                    before
                })
                .collect()
        }
    };
    Ok(profile)
}
