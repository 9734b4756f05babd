//! Ground-truth machinery: a brute-force optimum for tiny instances and an
//! LP-format export of the full mixed-integer model with solution
//! certification.

mod certify;
mod milp;
mod oracle;

pub use certify::{
    certify_milp_solution, solution_to_values, CertifyError, CertifyReport, RowCheck,
    ROW_TOLERANCE,
};
pub use milp::{
    build_milp, expected_row_count, expected_variable_count, to_lp_string, MilpModel, RowDef,
    Sense, VarKind, Variable,
};
pub use oracle::{
    brute_force_solve, brute_force_solve_with_limits, OracleError, OracleLimits,
};

use crate::model::{Instance, VariantConfig};

/// Build the model and render it as LP text in one step.
pub fn export_milp(inst: &Instance, cfg: VariantConfig) -> (MilpModel, String) {
    let model = build_milp(inst, cfg);
    let title = format!(
        "{} model: {} nodes, {} commodities",
        cfg,
        inst.num_nodes(),
        inst.commodities().len()
    );
    let text = to_lp_string(&model, &title);
    (model, text)
}
