//! Evaluate a variable assignment against every model row.

use super::milp::{MilpModel, Sense, VarKind};
use crate::model::{route_load_profile, Instance, RouteKind, Solution, VariantConfig};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Absolute violation tolerance on constraint rows.
pub const ROW_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("assignment is missing variable {0}")]
    MissingVariable(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub name: String,
    pub activity: f64,
    pub rhs: f64,
    /// Slack toward feasibility; negative beyond the tolerance means violated.
    pub slack: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub objective_value: f64,
    pub rows: Vec<RowCheck>,
    /// Binary variables taking fractional values, bounds breaches.
    pub domain_violations: Vec<String>,
    pub max_violation: f64,
}

impl CertifyReport {
    pub fn is_certified(&self) -> bool {
        self.rows.iter().all(|r| !r.violated) && self.domain_violations.is_empty()
    }

    pub fn violated_rows(&self) -> impl Iterator<Item = &RowCheck> {
        self.rows.iter().filter(|r| r.violated)
    }
}

/// Evaluate every row of the model at the given assignment.
pub fn certify_milp_solution(
    model: &MilpModel,
    values: &HashMap<String, f64>,
) -> Result<CertifyReport, CertifyError> {
    let mut by_index = vec![0.0; model.variables.len()];
    for (idx, var) in model.variables.iter().enumerate() {
        match values.get(&var.name) {
            Some(&v) => by_index[idx] = v,
            None => return Err(CertifyError::MissingVariable(var.name.clone())),
        }
    }

    let mut domain_violations = Vec::new();
    for (idx, var) in model.variables.iter().enumerate() {
        let v = by_index[idx];
        if var.kind == VarKind::Binary && (v - v.round()).abs() > ROW_TOLERANCE {
            domain_violations.push(format!("{} = {v} is not integral", var.name));
        }
        if v < -ROW_TOLERANCE {
            domain_violations.push(format!("{} = {v} is negative", var.name));
        }
        if var.fixed_zero && v.abs() > ROW_TOLERANCE {
            domain_violations.push(format!("{} = {v} but is fixed to zero", var.name));
        }
    }

    let objective_value: f64 = model
        .objective
        .iter()
        .map(|&(idx, coeff)| coeff * by_index[idx])
        .sum();

    let mut max_violation = 0.0f64;
    let rows = model
        .rows
        .iter()
        .map(|row| {
            let activity: f64 = row.terms.iter().map(|&(idx, c)| c * by_index[idx]).sum();
            let slack = match row.sense {
                Sense::Le => row.rhs - activity,
                Sense::Ge => activity - row.rhs,
                Sense::Eq => -(activity - row.rhs).abs(),
            };
            let violated = slack < -ROW_TOLERANCE;
            if violated {
                max_violation = max_violation.max(-slack);
            }
            RowCheck {
                name: row.name.clone(),
                activity,
                rhs: row.rhs,
                slack,
                violated,
            }
        })
        .collect();

    Ok(CertifyReport {
        objective_value,
        rows,
        domain_violations,
        max_violation,
    })
}

/// Translate a solution into the model's variable values: route arcs to `x`,
/// the commodity assignment to `z`, load profiles to `u`/`v`, and (under SA)
/// the node-to-warehouse choice to `y`.
pub fn solution_to_values(
    inst: &Instance,
    sol: &Solution,
    cfg: VariantConfig,
) -> HashMap<String, f64> {
    let mut values = HashMap::new();
    let n = inst.num_nodes();
    for i in 0..n {
        for j in 0..n {
            for &m in inst.warehouses() {
                values.insert(format!("x_{i}_{j}_{m}"), 0.0);
            }
        }
    }
    for &i in inst.factories() {
        for &j in inst.customers() {
            for &m in inst.warehouses() {
                for &w_del in inst.warehouses() {
                    values.insert(format!("z_{i}_{j}_{m}_{w_del}"), 0.0);
                }
            }
        }
    }
    for i in 0..n {
        for &m in inst.warehouses() {
            values.insert(format!("u_{i}_{m}"), 0.0);
            values.insert(format!("v_{i}_{m}"), 0.0);
        }
    }

    for (k, &(m, w_del)) in sol.assignment.pairs.iter().enumerate() {
        let c = inst.commodity(k);
        values.insert(format!("z_{}_{}_{m}_{w_del}", c.factory, c.customer), 1.0);
    }

    for route in &sol.routes {
        if route.visits.is_empty() {
            continue;
        }
        let m = route.warehouse;
        let mut prev = m;
        for visit in &route.visits {
            values.insert(format!("x_{prev}_{}_{m}", visit.node), 1.0);
            prev = visit.node;
        }
        values.insert(format!("x_{prev}_{m}_{m}"), 1.0);

        let profile = route_load_profile(inst, route, sol).expect("route belongs to solution");
        for (visit, load) in route.visits.iter().zip(&profile) {
            let key = match route.kind {
                RouteKind::Collection => format!("u_{}_{m}", visit.node),
                RouteKind::Delivery => format!("v_{}_{m}", visit.node),
            };
            values.insert(key, *load);
        }
    }

    if cfg == VariantConfig::WspsSa {
        let per_node = sol.warehouses_per_node();
        let first_warehouse = inst.warehouses()[0];
        for &i in inst.factories().iter().chain(inst.customers()) {
            for &m in inst.warehouses() {
                values.insert(format!("y_{i}_{m}"), 0.0);
            }
            // Unvisited nodes pin an arbitrary warehouse to satisfy the
            // one-warehouse row; visited nodes use their (unique) warehouse.
            let w = per_node
                .get(&i)
                .and_then(|ws| ws.iter().next().copied())
                .unwrap_or(first_warehouse);
            values.insert(format!("y_{i}_{w}"), 1.0);
        }
    }

    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::milp::build_milp;
    use crate::model::testutil::*;

    #[test]
    fn all_zero_assignment_violates_flow_rows() {
        let inst = toy_1w1f1c();
        let model = build_milp(&inst, VariantConfig::Wspsdp);
        let zeros: HashMap<String, f64> = model
            .variables
            .iter()
            .map(|v| (v.name.clone(), 0.0))
            .collect();
        let report = certify_milp_solution(&model, &zeros).unwrap();
        assert!(!report.is_certified());
        let violated: Vec<&str> = report
            .violated_rows()
            .map(|r| r.name.as_str())
            .collect();
        assert!(violated.contains(&"flow_1_2"));
    }

    #[test]
    fn hand_solution_certifies_for_every_variant() {
        let inst = toy_1w1f1c();
        let sol = toy_1w1f1c_solution();
        for cfg in VariantConfig::all() {
            let model = build_milp(&inst, cfg);
            let values = solution_to_values(&inst, &sol, cfg);
            let report = certify_milp_solution(&model, &values).unwrap();
            assert!(
                report.is_certified(),
                "{cfg}: {:?} / {:?}",
                report.violated_rows().collect::<Vec<_>>(),
                report.domain_violations,
            );
            assert!((report.objective_value - 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_variable_is_an_error() {
        let inst = toy_1w1f1c();
        let model = build_milp(&inst, VariantConfig::Wspsdp);
        let empty = HashMap::new();
        assert!(matches!(
            certify_milp_solution(&model, &empty),
            Err(CertifyError::MissingVariable(_))
        ));
    }

    #[test]
    fn perturbing_one_z_changes_only_rows_containing_it() {
        let inst = toy_2w1f1c();
        let model = build_milp(&inst, VariantConfig::Wspsdp);
        let sol = toy_2w1f1c_transfer_solution();
        let base_values = solution_to_values(&inst, &sol, VariantConfig::Wspsdp);
        let base = certify_milp_solution(&model, &base_values).unwrap();

        let mut bumped_values = base_values.clone();
        *bumped_values.get_mut("z_2_3_0_1").unwrap() += 0.1;
        let bumped = certify_milp_solution(&model, &bumped_values).unwrap();

        let zi = model.variable_index("z_2_3_0_1").unwrap();
        for ((a, b), row) in base.rows.iter().zip(&bumped.rows).zip(&model.rows) {
            let coeff = row
                .terms
                .iter()
                .find(|&&(idx, _)| idx == zi)
                .map(|&(_, c)| c)
                .unwrap_or(0.0);
            let expected_delta = coeff * 0.1;
            assert!(
                ((b.activity - a.activity) - expected_delta).abs() < 1e-9,
                "row {}: activity delta {} vs coeff*0.1 {}",
                a.name,
                b.activity - a.activity,
                expected_delta
            );
        }
        // The touched serve row is now violated.
        assert!(bumped.rows.iter().any(|r| r.name == "flow_2_3" && r.violated));
    }
}
