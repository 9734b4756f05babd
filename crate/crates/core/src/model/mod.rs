//! Problem and solution data model: objective evaluation, feasibility
//! certification and the canonical instance file format.

mod evaluate;
mod feasibility;
mod instance;
mod io;
mod solution;

pub use evaluate::{evaluate_objective, CostBreakdown, VariantConfig};
pub use feasibility::{
    validate_solution, FeasibilityReport, SolutionViolation, CAPACITY_TOLERANCE,
};
pub use instance::{
    validate_instance, Commodity, CommodityId, Instance, InstanceViolation, Node, NodeId, Role,
    ValidationReport, Warehouse,
};
pub use io::{
    instance_to_string, parse_instance, read_instance, write_instance, FormatError, InstanceFile,
    INSTANCE_FORMAT_VERSION,
};
pub use solution::{
    count_multi_allocation_nodes, route_load_profile, CommodityAssignment, ModelError, Route,
    RouteKind, Solution, SubNode,
};

/// Relative tolerance for cost comparisons.
pub const COST_TOLERANCE: f64 = 1e-9;

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use std::collections::BTreeSet;

    fn symmetric(n: usize, entries: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for &(i, j, d) in entries {
            m[i][j] = d;
            m[j][i] = d;
        }
        m
    }

    fn node(id: usize, role: Role) -> Node {
        Node { id, role, x: None, y: None }
    }

    fn sub(node: NodeId, warehouse: NodeId, ks: &[CommodityId]) -> SubNode {
        SubNode {
            node,
            warehouse,
            commodities: ks.iter().copied().collect::<BTreeSet<_>>(),
        }
    }

    /// Warehouse 0, factory 1, customer 2; q = 10, a = 0.2,
    /// c(0,1) = 3, c(0,2) = 4 symmetric, Qv = 50, Qm = 100.
    pub fn toy_1w1f1c() -> Instance {
        toy_1w1f1c_with_flow(10.0)
    }

    pub fn toy_1w1f1c_with_flow(q: f64) -> Instance {
        Instance::new(
            vec![
                node(0, Role::Warehouse),
                node(1, Role::Factory),
                node(2, Role::Customer),
            ],
            symmetric(3, &[(0, 1, 3.0), (0, 2, 4.0), (1, 2, 6.0)]),
            vec![(1, 2, q)],
            vec![Warehouse { id: 0, capacity: 100.0, unit_cost: 0.2 }],
            50.0,
            0.001,
            1.0,
        )
    }

    pub fn toy_1w1f1c_solution() -> Solution {
        Solution {
            routes: vec![
                Route {
                    warehouse: 0,
                    kind: RouteKind::Collection,
                    visits: vec![sub(1, 0, &[0])],
                },
                Route {
                    warehouse: 0,
                    kind: RouteKind::Delivery,
                    visits: vec![sub(2, 0, &[0])],
                },
            ],
            assignment: CommodityAssignment { pairs: vec![(0, 0)] },
        }
    }

    /// Warehouses 0 and 1 (c(0,1) = 5), factory 2, customer 3.
    pub fn toy_2w1f1c() -> Instance {
        Instance::new(
            vec![
                node(0, Role::Warehouse),
                node(1, Role::Warehouse),
                node(2, Role::Factory),
                node(3, Role::Customer),
            ],
            symmetric(
                4,
                &[
                    (0, 1, 5.0),
                    (0, 2, 3.0),
                    (0, 3, 4.0),
                    (1, 2, 6.0),
                    (1, 3, 2.0),
                    (2, 3, 7.0),
                ],
            ),
            vec![(2, 3, 10.0)],
            vec![
                Warehouse { id: 0, capacity: 100.0, unit_cost: 0.2 },
                Warehouse { id: 1, capacity: 100.0, unit_cost: 0.25 },
            ],
            50.0,
            0.001,
            1.0,
        )
    }

    /// Collect at warehouse 0, deliver via warehouse 1.
    pub fn toy_2w1f1c_transfer_solution() -> Solution {
        Solution {
            routes: vec![
                Route {
                    warehouse: 0,
                    kind: RouteKind::Collection,
                    visits: vec![sub(2, 0, &[0])],
                },
                Route {
                    warehouse: 1,
                    kind: RouteKind::Delivery,
                    visits: vec![sub(3, 1, &[0])],
                },
            ],
            assignment: CommodityAssignment { pairs: vec![(0, 1)] },
        }
    }

    /// Warehouses 0, 1; factory 2 shipping to customers 3 and 4.
    pub fn toy_2w1f2c() -> Instance {
        Instance::new(
            vec![
                node(0, Role::Warehouse),
                node(1, Role::Warehouse),
                node(2, Role::Factory),
                node(3, Role::Customer),
                node(4, Role::Customer),
            ],
            symmetric(
                5,
                &[
                    (0, 1, 5.0),
                    (0, 2, 3.0),
                    (0, 3, 4.0),
                    (0, 4, 6.0),
                    (1, 2, 6.0),
                    (1, 3, 2.0),
                    (1, 4, 3.0),
                    (2, 3, 7.0),
                    (2, 4, 8.0),
                    (3, 4, 2.0),
                ],
            ),
            vec![(2, 3, 10.0), (2, 4, 4.0)],
            vec![
                Warehouse { id: 0, capacity: 100.0, unit_cost: 0.2 },
                Warehouse { id: 1, capacity: 100.0, unit_cost: 0.25 },
            ],
            50.0,
            0.001,
            1.0,
        )
    }

    /// Factory 2 split across both warehouses (multi-allocation).
    pub fn toy_2w1f2c_split_solution() -> Solution {
        Solution {
            routes: vec![
                Route {
                    warehouse: 0,
                    kind: RouteKind::Collection,
                    visits: vec![sub(2, 0, &[0])],
                },
                Route {
                    warehouse: 1,
                    kind: RouteKind::Collection,
                    visits: vec![sub(2, 1, &[1])],
                },
                Route {
                    warehouse: 0,
                    kind: RouteKind::Delivery,
                    visits: vec![sub(3, 0, &[0])],
                },
                Route {
                    warehouse: 1,
                    kind: RouteKind::Delivery,
                    visits: vec![sub(4, 1, &[1])],
                },
            ],
            assignment: CommodityAssignment {
                pairs: vec![(0, 0), (1, 1)],
            },
        }
    }

    /// 2 warehouses / 2 factories / 2 customers with flows on all four pairs.
    pub fn two_by_two() -> Instance {
        Instance::new(
            two_by_two_nodes(),
            two_by_two_distance(),
            vec![(2, 4, 5.0), (2, 5, 3.0), (3, 4, 2.0), (3, 5, 4.0)],
            two_by_two_warehouses(),
            50.0,
            0.001,
            1.0,
        )
    }

    pub fn two_by_two_nodes() -> Vec<Node> {
        vec![
            node(0, Role::Warehouse),
            node(1, Role::Warehouse),
            node(2, Role::Factory),
            node(3, Role::Factory),
            node(4, Role::Customer),
            node(5, Role::Customer),
        ]
    }

    pub fn two_by_two_distance() -> Vec<Vec<f64>> {
        symmetric(
            6,
            &[
                (0, 1, 9.0),
                (0, 2, 2.0),
                (0, 3, 4.0),
                (0, 4, 5.0),
                (0, 5, 7.0),
                (1, 2, 8.0),
                (1, 3, 3.0),
                (1, 4, 4.0),
                (1, 5, 2.0),
                (2, 3, 5.0),
                (2, 4, 6.0),
                (2, 5, 9.0),
                (3, 4, 5.0),
                (3, 5, 4.0),
                (4, 5, 3.0),
            ],
        )
    }

    pub fn two_by_two_warehouses() -> Vec<Warehouse> {
        vec![
            Warehouse { id: 0, capacity: 30.0, unit_cost: 0.15 },
            Warehouse { id: 1, capacity: 30.0, unit_cost: 0.22 },
        ]
    }

    /// One warehouse and one factory sub-node per commodity quantity given;
    /// nodes 1..=len are factories, len+1..=2len customers.
    pub fn profile_instance(quantities: &[f64]) -> Instance {
        let k = quantities.len();
        let n = 1 + 2 * k;
        let mut nodes = vec![node(0, Role::Warehouse)];
        for i in 0..k {
            nodes.push(node(1 + i, Role::Factory));
        }
        for i in 0..k {
            nodes.push(node(1 + k + i, Role::Customer));
        }
        let mut dist = vec![vec![0.0; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            for (j, d) in row.iter_mut().enumerate() {
                if i != j {
                    *d = 1.0;
                }
            }
        }
        let flows = (0..k)
            .map(|i| (1 + i, 1 + k + i, quantities[i]))
            .collect();
        Instance::new(
            nodes,
            dist,
            flows,
            vec![Warehouse { id: 0, capacity: 1e6, unit_cost: 0.1 }],
            1e6,
            0.001,
            1.0,
        )
    }

    pub fn toy_no_flow() -> Instance {
        Instance::new(
            vec![node(0, Role::Warehouse), node(1, Role::Factory)],
            symmetric(2, &[(0, 1, 3.0)]),
            vec![],
            vec![Warehouse { id: 0, capacity: 10.0, unit_cost: 0.1 }],
            5.0,
            0.001,
            1.0,
        )
    }
}
