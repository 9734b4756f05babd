//! Problem instance: node set, distances, commodity flows and capacities.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Index of a node in the instance (ids are positional: node `i` is `nodes[i]`).
pub type NodeId = usize;

/// Index into [`Instance::commodities`].
pub type CommodityId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Factory,
    Customer,
    Warehouse,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Factory => write!(f, "factory"),
            Role::Customer => write!(f, "customer"),
            Role::Warehouse => write!(f, "warehouse"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

/// A positive flow from one factory to one customer.
#[derive(Clone, Debug, PartialEq)]
pub struct Commodity {
    pub factory: NodeId,
    pub customer: NodeId,
    pub quantity: f64,
}

/// Per-warehouse data: storage capacity and unit variable cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Warehouse {
    pub id: NodeId,
    pub capacity: f64,
    pub unit_cost: f64,
}

/// Immutable problem data. Safe to share across concurrent solver runs.
///
/// Construction is lenient: malformed data is preserved so that
/// [`validate_instance`](crate::model::validate_instance) can report every
/// violation; all solver entry points assume a validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    nodes: Vec<Node>,
    /// Row-major n*n matrix of directed travel distances.
    distance: Vec<f64>,
    /// Raw flow triples exactly as supplied (kept for validation).
    raw_flows: Vec<(usize, usize, f64)>,
    warehouse_records: Vec<Warehouse>,
    vehicle_capacity: f64,
    alpha: f64,
    beta: f64,

    // Derived views (built only from well-formed entries).
    commodities: Vec<Commodity>,
    factories: Vec<NodeId>,
    customers: Vec<NodeId>,
    warehouses: Vec<NodeId>,
    capacity_of: Vec<f64>,
    unit_cost_of: Vec<f64>,
    /// Total demand per node: outbound flow for factories, inbound for customers.
    node_demand: Vec<f64>,
    /// Commodity ids touching each node (as factory or customer endpoint).
    commodities_of: Vec<Vec<CommodityId>>,
}

impl Instance {
    pub fn new(
        nodes: Vec<Node>,
        distance: Vec<Vec<f64>>,
        flows: Vec<(usize, usize, f64)>,
        warehouses: Vec<Warehouse>,
        vehicle_capacity: f64,
        alpha: f64,
        beta: f64,
    ) -> Self {
        let n = nodes.len();
        let mut flat = vec![0.0; n * n];
        for (i, row) in distance.iter().enumerate().take(n) {
            for (j, &d) in row.iter().enumerate().take(n) {
                flat[i * n + j] = d;
            }
        }

        let mut inst = Instance {
            nodes,
            distance: flat,
            raw_flows: flows,
            warehouse_records: warehouses,
            vehicle_capacity,
            alpha,
            beta,
            commodities: Vec::new(),
            factories: Vec::new(),
            customers: Vec::new(),
            warehouses: Vec::new(),
            capacity_of: vec![0.0; n],
            unit_cost_of: vec![0.0; n],
            node_demand: vec![0.0; n],
            commodities_of: vec![Vec::new(); n],
        };
        inst.rebuild_views();
        inst
    }

    fn rebuild_views(&mut self) {
        let n = self.nodes.len();
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.id != idx {
                continue;
            }
            match node.role {
                Role::Factory => self.factories.push(idx),
                Role::Customer => self.customers.push(idx),
                Role::Warehouse => self.warehouses.push(idx),
            }
        }
        for w in &self.warehouse_records {
            if w.id < n && self.nodes[w.id].role == Role::Warehouse {
                self.capacity_of[w.id] = w.capacity;
                self.unit_cost_of[w.id] = w.unit_cost;
            }
        }
        // Canonical commodity order: (factory, customer) ascending.
        let mut valid: Vec<Commodity> = self
            .raw_flows
            .iter()
            .filter(|&&(i, j, q)| {
                q > 0.0
                    && i < n
                    && j < n
                    && self.nodes[i].role == Role::Factory
                    && self.nodes[j].role == Role::Customer
            })
            .map(|&(i, j, q)| Commodity {
                factory: i,
                customer: j,
                quantity: q,
            })
            .collect();
        valid.sort_by_key(|c| (c.factory, c.customer));
        self.commodities = valid;
        for (k, c) in self.commodities.iter().enumerate() {
            self.node_demand[c.factory] += c.quantity;
            self.node_demand[c.customer] += c.quantity;
            self.commodities_of[c.factory].push(k);
            self.commodities_of[c.customer].push(k);
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn role(&self, id: NodeId) -> Role {
        self.nodes[id].role
    }

    /// Directed travel distance from `i` to `j`.
    #[inline]
    pub fn dist(&self, i: NodeId, j: NodeId) -> f64 {
        self.distance[i * self.nodes.len() + j]
    }

    pub fn factories(&self) -> &[NodeId] {
        &self.factories
    }

    pub fn customers(&self) -> &[NodeId] {
        &self.customers
    }

    pub fn warehouses(&self) -> &[NodeId] {
        &self.warehouses
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn commodity(&self, k: CommodityId) -> &Commodity {
        &self.commodities[k]
    }

    /// Commodity ids that have this node as an endpoint.
    pub fn commodities_of(&self, id: NodeId) -> &[CommodityId] {
        &self.commodities_of[id]
    }

    /// Total outbound (factory) or inbound (customer) flow of a node.
    pub fn node_demand(&self, id: NodeId) -> f64 {
        self.node_demand[id]
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.quantity).sum()
    }

    pub fn warehouse_capacity(&self, w: NodeId) -> f64 {
        self.capacity_of[w]
    }

    pub fn warehouse_unit_cost(&self, w: NodeId) -> f64 {
        self.unit_cost_of[w]
    }

    pub fn vehicle_capacity(&self) -> f64 {
        self.vehicle_capacity
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn warehouse_records(&self) -> &[Warehouse] {
        &self.warehouse_records
    }

    pub fn raw_flows(&self) -> &[(usize, usize, f64)] {
        &self.raw_flows
    }

    pub fn distance_rows(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| self.distance[i * n..(i + 1) * n].to_vec())
            .collect()
    }

    /// Largest entry of the distance matrix (used to normalize relatedness).
    pub fn max_distance(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }
}

/// One violated instance invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceViolation {
    NodeIdMismatch { position: usize, id: NodeId },
    DistanceShape { rows: usize, expected: usize },
    DistanceRowShape { row: usize, len: usize, expected: usize },
    NegativeDistance { from: usize, to: usize, value: f64 },
    NonzeroDiagonal { node: usize, value: f64 },
    NonFiniteDistance { from: usize, to: usize },
    FlowOutsideFactoryCustomer { from: usize, to: usize },
    NegativeFlow { from: usize, to: usize, value: f64 },
    DuplicateFlow { from: usize, to: usize },
    FlowIndexOutOfRange { from: usize, to: usize },
    MissingWarehouseRecord { node: NodeId },
    SpuriousWarehouseRecord { id: NodeId },
    DuplicateWarehouseRecord { id: NodeId },
    NonpositiveWarehouseCapacity { id: NodeId, value: f64 },
    NegativeWarehouseUnitCost { id: NodeId, value: f64 },
    NonpositiveVehicleCapacity { value: f64 },
    NegativeAlpha { value: f64 },
    NegativeBeta { value: f64 },
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceViolation::*;
        match self {
            NodeIdMismatch { position, id } => {
                write!(f, "node at position {position} has id {id}; ids must be positional")
            }
            DistanceShape { rows, expected } => {
                write!(f, "distance matrix has {rows} rows, expected {expected}")
            }
            DistanceRowShape { row, len, expected } => {
                write!(f, "distance row {row} has {len} entries, expected {expected}")
            }
            NegativeDistance { from, to, value } => {
                write!(f, "negative distance {value} from {from} to {to}")
            }
            NonzeroDiagonal { node, value } => {
                write!(f, "distance from node {node} to itself is {value}, expected 0")
            }
            NonFiniteDistance { from, to } => {
                write!(f, "non-finite distance from {from} to {to}")
            }
            FlowOutsideFactoryCustomer { from, to } => {
                write!(f, "flow outside F\u{d7}C: ({from}, {to})")
            }
            NegativeFlow { from, to, value } => {
                write!(f, "negative flow {value} on ({from}, {to})")
            }
            DuplicateFlow { from, to } => write!(f, "duplicate flow entry ({from}, {to})"),
            FlowIndexOutOfRange { from, to } => {
                write!(f, "flow ({from}, {to}) references an unknown node")
            }
            MissingWarehouseRecord { node } => {
                write!(f, "warehouse node {node} has no capacity/cost record")
            }
            SpuriousWarehouseRecord { id } => {
                write!(f, "warehouse record for non-warehouse node {id}")
            }
            DuplicateWarehouseRecord { id } => {
                write!(f, "duplicate warehouse record for node {id}")
            }
            NonpositiveWarehouseCapacity { id, value } => {
                write!(f, "nonpositive capacity {value} for warehouse {id}")
            }
            NegativeWarehouseUnitCost { id, value } => {
                write!(f, "negative unit cost {value} for warehouse {id}")
            }
            NonpositiveVehicleCapacity { value } => {
                write!(f, "nonpositive vehicle capacity {value}")
            }
            NegativeAlpha { value } => write!(f, "negative alpha {value}"),
            NegativeBeta { value } => write!(f, "negative beta {value}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<InstanceViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "ok")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

/// Check every instance invariant; returns all violations found.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut out = Vec::new();
    let n = inst.nodes.len();

    for (pos, node) in inst.nodes.iter().enumerate() {
        if node.id != pos {
            out.push(InstanceViolation::NodeIdMismatch {
                position: pos,
                id: node.id,
            });
        }
    }

    if inst.distance.len() != n * n {
        out.push(InstanceViolation::DistanceShape {
            rows: if n == 0 { 0 } else { inst.distance.len() / n },
            expected: n,
        });
    } else {
        for i in 0..n {
            for j in 0..n {
                let d = inst.distance[i * n + j];
                if !d.is_finite() {
                    out.push(InstanceViolation::NonFiniteDistance { from: i, to: j });
                } else if d < 0.0 {
                    out.push(InstanceViolation::NegativeDistance {
                        from: i,
                        to: j,
                        value: d,
                    });
                } else if i == j && d != 0.0 {
                    out.push(InstanceViolation::NonzeroDiagonal { node: i, value: d });
                }
            }
        }
    }

    let mut seen = std::collections::HashSet::new();
    for &(i, j, q) in &inst.raw_flows {
        if i >= n || j >= n {
            out.push(InstanceViolation::FlowIndexOutOfRange { from: i, to: j });
            continue;
        }
        if !seen.insert((i, j)) {
            out.push(InstanceViolation::DuplicateFlow { from: i, to: j });
        }
        if q < 0.0 || !q.is_finite() {
            out.push(InstanceViolation::NegativeFlow {
                from: i,
                to: j,
                value: q,
            });
        } else if q > 0.0
            && !(inst.nodes[i].role == Role::Factory && inst.nodes[j].role == Role::Customer)
        {
            out.push(InstanceViolation::FlowOutsideFactoryCustomer { from: i, to: j });
        }
    }

    let mut recorded = std::collections::HashSet::new();
    for w in &inst.warehouse_records {
        if w.id >= n || inst.nodes[w.id].role != Role::Warehouse {
            out.push(InstanceViolation::SpuriousWarehouseRecord { id: w.id });
            continue;
        }
        if !recorded.insert(w.id) {
            out.push(InstanceViolation::DuplicateWarehouseRecord { id: w.id });
        }
        if !(w.capacity > 0.0) {
            out.push(InstanceViolation::NonpositiveWarehouseCapacity {
                id: w.id,
                value: w.capacity,
            });
        }
        if w.unit_cost < 0.0 || !w.unit_cost.is_finite() {
            out.push(InstanceViolation::NegativeWarehouseUnitCost {
                id: w.id,
                value: w.unit_cost,
            });
        }
    }
    for &w in &inst.warehouses {
        if !recorded.contains(&w) {
            out.push(InstanceViolation::MissingWarehouseRecord { node: w });
        }
    }

    if !(inst.vehicle_capacity > 0.0) {
        out.push(InstanceViolation::NonpositiveVehicleCapacity {
            value: inst.vehicle_capacity,
        });
    }
    if inst.alpha < 0.0 || !inst.alpha.is_finite() {
        out.push(InstanceViolation::NegativeAlpha { value: inst.alpha });
    }
    if inst.beta < 0.0 || !inst.beta.is_finite() {
        out.push(InstanceViolation::NegativeBeta { value: inst.beta });
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;

    #[test]
    fn well_formed_instance_validates() {
        let inst = two_by_two();
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn flow_outside_factory_customer_is_flagged() {
        let mut flows = vec![(2, 4, 5.0)];
        flows.push((4, 2, 1.0)); // customer -> factory
        let inst = Instance::new(
            two_by_two_nodes(),
            two_by_two_distance(),
            flows,
            two_by_two_warehouses(),
            50.0,
            0.001,
            1.0,
        );
        let report = validate_instance(&inst);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, InstanceViolation::FlowOutsideFactoryCustomer { from: 4, to: 2 })));
    }

    #[test]
    fn zero_vehicle_capacity_is_flagged() {
        let inst = Instance::new(
            two_by_two_nodes(),
            two_by_two_distance(),
            vec![(2, 4, 5.0)],
            two_by_two_warehouses(),
            0.0,
            0.001,
            1.0,
        );
        let report = validate_instance(&inst);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, InstanceViolation::NonpositiveVehicleCapacity { .. })));
    }

    #[test]
    fn commodities_are_sorted_and_positive() {
        let inst = Instance::new(
            two_by_two_nodes(),
            two_by_two_distance(),
            vec![(3, 5, 2.0), (2, 4, 5.0), (2, 5, 0.0)],
            two_by_two_warehouses(),
            50.0,
            0.001,
            1.0,
        );
        let pairs: Vec<_> = inst
            .commodities()
            .iter()
            .map(|c| (c.factory, c.customer))
            .collect();
        assert_eq!(pairs, vec![(2, 4), (3, 5)]);
        assert_eq!(inst.node_demand(2), 5.0);
        assert_eq!(inst.node_demand(5), 2.0);
    }
}
