//! Finite domains and the constraints the two problems are built from:
//! extended tables, the component budget, and pairwise alldifferent.

mod alldiff;
mod budget;
mod domain;
mod table;

pub use alldiff::{alldifferent_filter, AllDifferentOutcome};
pub use budget::{
    budget_propagate, enumerate_budget_feasible, BudgetConstraint, BudgetPropagation,
};
pub use domain::{BoolDomain, IntDomain};
pub use table::{
    encode_norm_ball, encode_smart_design, CostFn, ExtendedTable, MAX_ENUMERATED_COMPONENTS,
    MAX_TABLE_ARITY,
};
