//! Objective evaluation and the model variants.

use super::instance::Instance;
use super::solution::{ModelError, Solution};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which model is solved.
///
/// `WspsSa` restricts every factory/customer to a single warehouse;
/// `WspsWi` forbids inter-warehouse transfers (collection warehouse equals
/// delivery warehouse for every commodity). `Wspsdp` is the full model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VariantConfig {
    #[default]
    Wspsdp,
    WspsSa,
    WspsWi,
}

impl VariantConfig {
    pub fn all() -> [VariantConfig; 3] {
        [VariantConfig::Wspsdp, VariantConfig::WspsSa, VariantConfig::WspsWi]
    }

    /// Short name used in CLI flags and file names.
    pub fn tag(self) -> &'static str {
        match self {
            VariantConfig::Wspsdp => "wspsdp",
            VariantConfig::WspsSa => "sa",
            VariantConfig::WspsWi => "wi",
        }
    }

    pub fn parse_tag(s: &str) -> Option<VariantConfig> {
        match s {
            "wspsdp" => Some(VariantConfig::Wspsdp),
            "sa" | "wsps-sa" | "wsps_sa" => Some(VariantConfig::WspsSa),
            "wi" | "wsps-wi" | "wsps_wi" => Some(VariantConfig::WspsWi),
            _ => None,
        }
    }
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The three objective terms and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Per-flow-unit warehouse cost, charged at the collection warehouse only.
    pub variable_cost: f64,
    /// Beta-weighted length of every local tour.
    pub local_tour_cost: f64,
    /// Alpha-weighted flow-distance of inter-warehouse transfers.
    pub inter_warehouse_cost: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn zero() -> Self {
        CostBreakdown {
            variable_cost: 0.0,
            local_tour_cost: 0.0,
            inter_warehouse_cost: 0.0,
            total: 0.0,
        }
    }
}

/// Compute the exact objective of a solution.
///
/// The caller is expected to have validated the solution; structurally
/// dangling node or commodity references yield a [`ModelError`].
pub fn evaluate_objective(inst: &Instance, sol: &Solution) -> Result<CostBreakdown, ModelError> {
    let n = inst.num_nodes();
    if sol.assignment.len() != inst.commodities().len() {
        return Err(ModelError::AssignmentLength {
            got: sol.assignment.len(),
            expected: inst.commodities().len(),
        });
    }

    let mut variable = 0.0;
    let mut transfer = 0.0;
    for (k, &(m, w_delivery)) in sol.assignment.pairs.iter().enumerate() {
        if m >= n || w_delivery >= n {
            return Err(ModelError::UnknownNode(m.max(w_delivery)));
        }
        let q = inst.commodity(k).quantity;
        variable += inst.warehouse_unit_cost(m) * q;
        transfer += inst.alpha() * inst.dist(m, w_delivery) * q;
    }

    let mut tour = 0.0;
    for route in &sol.routes {
        if route.warehouse >= n {
            return Err(ModelError::UnknownNode(route.warehouse));
        }
        for v in &route.visits {
            if v.node >= n {
                return Err(ModelError::UnknownNode(v.node));
            }
            for &k in &v.commodities {
                if k >= inst.commodities().len() {
                    return Err(ModelError::UnknownCommodity(k));
                }
            }
        }
        tour += route.length(inst);
    }
    tour *= inst.beta();

    Ok(CostBreakdown {
        variable_cost: variable,
        local_tour_cost: tour,
        inter_warehouse_cost: transfer,
        total: variable + tour + transfer,
    })
}
