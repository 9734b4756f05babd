//! Mixed-integer model of the full formulation and its LP-format export.
//!
//! Variable naming is fixed: `x_i_j_m` (binary routing arcs), `z_i_j_m_n`
//! (flow fraction of commodity (i, j) through warehouses m and n), `u_i_m` /
//! `v_i_m` (collection/delivery loads), and `y_i_m` (single-allocation
//! binaries, only under the SA variant).
//!
//! Closed-form counts for an instance with n nodes, f factories, c
//! customers, w warehouses and k positive commodities:
//! variables: `n*n*w` x + `f*c*w*w` z + `2*n*w` load variables (+
//! `(f+c)*w` y under SA). Flow-fraction variables of zero-flow pairs are
//! fixed to zero in the bounds section so they never force vehicle visits.

use crate::model::{Instance, NodeId, Role, VariantConfig};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// Fixed to zero in the bounds section.
    pub fixed_zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RowDef {
    pub name: String,
    /// (variable index, coefficient); indices refer to `MilpModel::variables`.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<RowDef>,
    pub big_m_collection: f64,
    pub big_m_delivery: f64,
    name_index: HashMap<String, usize>,
}

impl MilpModel {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

struct ModelBuilder {
    variables: Vec<Variable>,
    name_index: HashMap<String, usize>,
}

impl ModelBuilder {
    fn add(&mut self, name: String, kind: VarKind) -> usize {
        let idx = self.variables.len();
        self.name_index.insert(name.clone(), idx);
        self.variables.push(Variable { name, kind, fixed_zero: false });
        idx
    }
}

fn x_name(i: NodeId, j: NodeId, m: NodeId) -> String {
    format!("x_{i}_{j}_{m}")
}

fn z_name(i: NodeId, j: NodeId, m: NodeId, n: NodeId) -> String {
    format!("z_{i}_{j}_{m}_{n}")
}

fn u_name(i: NodeId, m: NodeId) -> String {
    format!("u_{i}_{m}")
}

fn v_name(i: NodeId, m: NodeId) -> String {
    format!("v_{i}_{m}")
}

fn y_name(i: NodeId, m: NodeId) -> String {
    format!("y_{i}_{m}")
}

/// Build the model rows for an instance under a variant.
pub fn build_milp(inst: &Instance, cfg: VariantConfig) -> MilpModel {
    let n = inst.num_nodes();
    let factories = inst.factories();
    let customers = inst.customers();
    let warehouses = inst.warehouses();
    let big_m_collection = customers.len() as f64;
    let big_m_delivery = factories.len() as f64;

    let mut b = ModelBuilder { variables: Vec::new(), name_index: HashMap::new() };

    // Flow lookup for (factory, customer) pairs.
    let mut flow = HashMap::new();
    for c in inst.commodities() {
        flow.insert((c.factory, c.customer), c.quantity);
    }

    let mut x = vec![usize::MAX; n * n * warehouses.len()];
    for i in 0..n {
        for j in 0..n {
            for (wi, &m) in warehouses.iter().enumerate() {
                x[(i * n + j) * warehouses.len() + wi] = b.add(x_name(i, j, m), VarKind::Binary);
            }
        }
    }
    let xof = |i: NodeId, j: NodeId, wi: usize| x[(i * n + j) * warehouses.len() + wi];

    let mut z = HashMap::new();
    for &i in factories {
        for &j in customers {
            for &m in warehouses {
                for &w_del in warehouses {
                    let idx = b.add(z_name(i, j, m, w_del), VarKind::Continuous);
                    if !flow.contains_key(&(i, j)) {
                        b.variables[idx].fixed_zero = true;
                    }
                    z.insert((i, j, m, w_del), idx);
                }
            }
        }
    }

    let mut u = HashMap::new();
    let mut v = HashMap::new();
    for i in 0..n {
        for &m in warehouses {
            u.insert((i, m), b.add(u_name(i, m), VarKind::Continuous));
            v.insert((i, m), b.add(v_name(i, m), VarKind::Continuous));
        }
    }

    let mut y = HashMap::new();
    if cfg == VariantConfig::WspsSa {
        for &i in factories.iter().chain(customers) {
            for &m in warehouses {
                y.insert((i, m), b.add(y_name(i, m), VarKind::Binary));
            }
        }
    }

    // Objective: variable cost + local tours + inter-warehouse transfers.
    let mut objective: Vec<(usize, f64)> = Vec::new();
    for (&(i, j, m, w_del), &idx) in &z {
        if let Some(&q) = flow.get(&(i, j)) {
            let coeff = inst.warehouse_unit_cost(m) * q + inst.alpha() * inst.dist(m, w_del) * q;
            if coeff != 0.0 {
                objective.push((idx, coeff));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let coeff = inst.beta() * inst.dist(i, j);
            if coeff == 0.0 {
                continue;
            }
            for wi in 0..warehouses.len() {
                objective.push((xof(i, j, wi), coeff));
            }
        }
    }
    objective.sort_by_key(|&(idx, _)| idx);

    let mut rows = Vec::new();

    // (2) every positive flow is fully served.
    for c in inst.commodities() {
        let mut terms = Vec::new();
        for &m in warehouses {
            for &w_del in warehouses {
                terms.push((z[&(c.factory, c.customer, m, w_del)], 1.0));
            }
        }
        rows.push(RowDef {
            name: format!("flow_{}_{}", c.factory, c.customer),
            terms,
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    // (3) warehouse capacity: collected flow plus transfers in.
    for &m in warehouses {
        let mut coeffs: HashMap<usize, f64> = HashMap::new();
        for c in inst.commodities() {
            for &w_del in warehouses {
                *coeffs.entry(z[&(c.factory, c.customer, m, w_del)]).or_default() += c.quantity;
            }
            for &w_coll in warehouses {
                if w_coll != m {
                    *coeffs.entry(z[&(c.factory, c.customer, w_coll, m)]).or_default() +=
                        c.quantity;
                }
            }
        }
        let mut terms: Vec<(usize, f64)> = coeffs.into_iter().collect();
        terms.sort_by_key(|&(idx, _)| idx);
        rows.push(RowDef {
            name: format!("wcap_{m}"),
            terms,
            sense: Sense::Le,
            rhs: inst.warehouse_capacity(m),
        });
    }

    // (4) nodes with positive flow are visited at least once.
    for &i in factories.iter().chain(customers) {
        if inst.node_demand(i) <= 0.0 {
            continue;
        }
        let mut terms = Vec::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            for wi in 0..warehouses.len() {
                terms.push((xof(i, j, wi), 1.0));
            }
        }
        rows.push(RowDef { name: format!("visit_{i}"), terms, sense: Sense::Ge, rhs: 1.0 });
    }

    // (5) at most one vehicle per (node, warehouse).
    for &i in factories.iter().chain(customers) {
        for (wi, &m) in warehouses.iter().enumerate() {
            let terms = (0..n)
                .filter(|&j| j != i)
                .map(|j| (xof(i, j, wi), 1.0))
                .collect();
            rows.push(RowDef {
                name: format!("single_{i}_{m}"),
                terms,
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
    }

    // (6) vehicle flow conservation.
    for i in 0..n {
        for (wi, &m) in warehouses.iter().enumerate() {
            let mut terms = Vec::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                terms.push((xof(i, j, wi), 1.0));
                terms.push((xof(j, i, wi), -1.0));
            }
            rows.push(RowDef {
                name: format!("flowcons_{i}_{m}"),
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
            });
        }
    }

    // (7) collected flow needs an outgoing vehicle at the factory.
    for &i in factories {
        for (wi, &m) in warehouses.iter().enumerate() {
            let mut terms: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (xof(i, j, wi), big_m_collection))
                .collect();
            for &j in customers {
                for &w_del in warehouses {
                    terms.push((z[&(i, j, m, w_del)], -1.0));
                }
            }
            rows.push(RowDef {
                name: format!("link_f_{i}_{m}"),
                terms,
                sense: Sense::Ge,
                rhs: 0.0,
            });
        }
    }

    // (8) delivered flow needs an outgoing vehicle at the customer.
    for &i in customers {
        for (wi, &m) in warehouses.iter().enumerate() {
            let mut terms: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (xof(i, j, wi), big_m_delivery))
                .collect();
            for &j in factories {
                for &w_coll in warehouses {
                    terms.push((z[&(j, i, w_coll, m)], -1.0));
                }
            }
            rows.push(RowDef {
                name: format!("link_c_{i}_{m}"),
                terms,
                sense: Sense::Ge,
                rhs: 0.0,
            });
        }
    }

    // (9) no arcs between factories and customers.
    for (wi, &m) in warehouses.iter().enumerate() {
        let mut terms = Vec::new();
        for &i in factories {
            for &j in customers {
                terms.push((xof(i, j, wi), 1.0));
                terms.push((xof(j, i, wi), 1.0));
            }
        }
        rows.push(RowDef { name: format!("nomix_{m}"), terms, sense: Sense::Eq, rhs: 0.0 });
    }

    // (10) local tours never link warehouses.
    for (wi, &m) in warehouses.iter().enumerate() {
        let mut terms = Vec::new();
        for &a in warehouses {
            for &bq in warehouses {
                terms.push((xof(a, bq, wi), 1.0));
            }
        }
        rows.push(RowDef { name: format!("nolink_{m}"), terms, sense: Sense::Eq, rhs: 0.0 });
    }

    // (11) collection load propagation:
    // u_im + sum_s q_js z_jsmn - Qv (1 - x_ijm) <= u_jm.
    let qv = inst.vehicle_capacity();
    for i in 0..n {
        for &j in factories {
            if j == i {
                continue;
            }
            for (wi, &m) in warehouses.iter().enumerate() {
                let mut terms = vec![(u[&(i, m)], 1.0), (u[&(j, m)], -1.0)];
                for &s in customers {
                    if let Some(&q) = flow.get(&(j, s)) {
                        for &w_del in warehouses {
                            terms.push((z[&(j, s, m, w_del)], q));
                        }
                    }
                }
                terms.push((xof(i, j, wi), qv));
                rows.push(RowDef {
                    name: format!("cload_{i}_{j}_{m}"),
                    terms,
                    sense: Sense::Le,
                    rhs: qv,
                });
            }
        }
    }

    // (12) delivery load propagation:
    // v_im - sum_s q_si z_sinm + Qv (1 - x_ijm) >= v_jm.
    for &i in customers {
        for j in 0..n {
            if j == i {
                continue;
            }
            for (wi, &m) in warehouses.iter().enumerate() {
                let mut terms = vec![(v[&(i, m)], 1.0), (v[&(j, m)], -1.0)];
                for &s in factories {
                    if let Some(&q) = flow.get(&(s, i)) {
                        for &w_coll in warehouses {
                            terms.push((z[&(s, i, w_coll, m)], -q));
                        }
                    }
                }
                terms.push((xof(i, j, wi), -qv));
                rows.push(RowDef {
                    name: format!("dload_{i}_{j}_{m}"),
                    terms,
                    sense: Sense::Ge,
                    rhs: -qv,
                });
            }
        }
    }

    // (13) vehicle capacity.
    for &i in factories.iter().chain(customers) {
        for &m in warehouses {
            rows.push(RowDef {
                name: format!("vcap_{i}_{m}"),
                terms: vec![(u[&(i, m)], 1.0), (v[&(i, m)], 1.0)],
                sense: Sense::Le,
                rhs: qv,
            });
        }
    }

    // Variant extras.
    match cfg {
        VariantConfig::Wspsdp => {}
        VariantConfig::WspsWi => {
            for c in inst.commodities() {
                for &m in warehouses {
                    for &w_del in warehouses {
                        if m != w_del {
                            rows.push(RowDef {
                                name: format!("wi_{}_{}_{m}_{w_del}", c.factory, c.customer),
                                terms: vec![(z[&(c.factory, c.customer, m, w_del)], 1.0)],
                                sense: Sense::Eq,
                                rhs: 0.0,
                            });
                        }
                    }
                }
            }
        }
        VariantConfig::WspsSa => {
            for &i in factories.iter().chain(customers) {
                let terms = warehouses.iter().map(|&m| (y[&(i, m)], 1.0)).collect();
                rows.push(RowDef {
                    name: format!("sa_one_{i}"),
                    terms,
                    sense: Sense::Eq,
                    rhs: 1.0,
                });
            }
            for &i in factories.iter().chain(customers) {
                for (wi, &m) in warehouses.iter().enumerate() {
                    let mut terms: Vec<(usize, f64)> = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| (xof(i, j, wi), 1.0))
                        .collect();
                    terms.push((y[&(i, m)], -1.0));
                    rows.push(RowDef {
                        name: format!("sa_x_{i}_{m}"),
                        terms,
                        sense: Sense::Le,
                        rhs: 0.0,
                    });
                }
            }
            for c in inst.commodities() {
                for &m in warehouses {
                    for &w_del in warehouses {
                        let zi = z[&(c.factory, c.customer, m, w_del)];
                        rows.push(RowDef {
                            name: format!("sa_zc_{}_{}_{m}_{w_del}", c.factory, c.customer),
                            terms: vec![(zi, 1.0), (y[&(c.factory, m)], -1.0)],
                            sense: Sense::Le,
                            rhs: 0.0,
                        });
                        rows.push(RowDef {
                            name: format!("sa_zd_{}_{}_{m}_{w_del}", c.factory, c.customer),
                            terms: vec![(zi, 1.0), (y[&(c.customer, w_del)], -1.0)],
                            sense: Sense::Le,
                            rhs: 0.0,
                        });
                    }
                }
            }
        }
    }

    MilpModel {
        variables: b.variables,
        objective,
        rows,
        big_m_collection,
        big_m_delivery,
        name_index: b.name_index,
    }
}

/// Render the model as LP interchange text.
pub fn to_lp_string(model: &MilpModel, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {title}");
    out.push_str("Minimize\n");
    out.push_str(&render_terms(" obj:", &model.objective, model));
    out.push_str("Subject To\n");
    for row in &model.rows {
        let mut line = render_terms(&format!(" {}:", row.name), &row.terms, model);
        // Senses and right-hand side go on the final line.
        line.pop();
        let _ = writeln!(line, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
        out.push_str(&line);
    }
    let fixed: Vec<&Variable> = model.variables.iter().filter(|v| v.fixed_zero).collect();
    if !fixed.is_empty() {
        out.push_str("Bounds\n");
        for var in fixed {
            let _ = writeln!(out, " {} = 0", var.name);
        }
    }
    let binaries: Vec<&Variable> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        let mut line = String::new();
        for var in binaries {
            if line.len() + var.name.len() + 1 > 240 {
                let _ = writeln!(out, " {line}");
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&var.name);
        }
        if !line.is_empty() {
            let _ = writeln!(out, " {line}");
        }
    }
    out.push_str("End\n");
    out
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn render_terms(prefix: &str, terms: &[(usize, f64)], model: &MilpModel) -> String {
    let mut out = String::new();
    let mut line = prefix.to_string();
    let mut first = true;
    if terms.is_empty() {
        line.push_str(" 0 ");
        line.push_str(&model.variables[0].name);
        first = false;
    }
    for &(idx, coeff) in terms {
        let name = &model.variables[idx].name;
        let piece = if first {
            if coeff < 0.0 {
                format!(" - {} {}", fmt_num(-coeff), name)
            } else {
                format!(" {} {}", fmt_num(coeff), name)
            }
        } else if coeff < 0.0 {
            format!(" - {} {}", fmt_num(-coeff), name)
        } else {
            format!(" + {} {}", fmt_num(coeff), name)
        };
        first = false;
        if line.len() + piece.len() > 240 {
            out.push_str(&line);
            out.push('\n');
            line = String::from(" ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
    out.push('\n');
    out
}

/// Expected variable count from the combinatorial index sets.
pub fn expected_variable_count(inst: &Instance, cfg: VariantConfig) -> usize {
    let n = inst.num_nodes();
    let f = inst.factories().len();
    let c = inst.customers().len();
    let w = inst.warehouses().len();
    let mut count = n * n * w + f * c * w * w + 2 * n * w;
    if cfg == VariantConfig::WspsSa {
        count += (f + c) * w;
    }
    count
}

fn role_count(inst: &Instance, role: Role) -> usize {
    match role {
        Role::Factory => inst.factories().len(),
        Role::Customer => inst.customers().len(),
        Role::Warehouse => inst.warehouses().len(),
    }
}

/// Expected row count from the constraint index sets.
pub fn expected_row_count(inst: &Instance, cfg: VariantConfig) -> usize {
    let n = inst.num_nodes();
    let f = role_count(inst, Role::Factory);
    let c = role_count(inst, Role::Customer);
    let w = role_count(inst, Role::Warehouse);
    let k = inst.commodities().len();
    let visited = inst
        .factories()
        .iter()
        .chain(inst.customers())
        .filter(|&&i| inst.node_demand(i) > 0.0)
        .count();
    let mut rows = k                    // (2)
        + w                             // (3)
        + visited                       // (4)
        + (f + c) * w                   // (5)
        + n * w                         // (6)
        + f * w                         // (7)
        + c * w                         // (8)
        + w                             // (9)
        + w                             // (10)
        + f * (n - 1) * w               // (11)
        + c * (n - 1) * w               // (12)
        + (f + c) * w; // (13)
    match cfg {
        VariantConfig::Wspsdp => {}
        VariantConfig::WspsWi => rows += k * w * (w - 1),
        VariantConfig::WspsSa => rows += (f + c) + (f + c) * w + 2 * k * w * w,
    }
    rows
}
