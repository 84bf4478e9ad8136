//! Branch, generate and learn.
//!
//! A branch-and-bound style tree search for constrained machine learning.
//! Every node of the tree restricts the hypothesis space of a learning
//! problem (by masking parameters), trains the restricted problem, and uses
//! the trained loss as a bound. The search stops expanding a node once every
//! model its subproblem can produce satisfies the constraints.
//!
//! Two problems are provided:
//!
//! * [`smart_design`]: linear regression where input components have a cost
//!   and the set of active components must fit a budget.
//! * [`prior_nmf`]: non-negative matrix factorization where every column of
//!   `W` must be a subset of a distinct topic from a prior database.
//!
//! The generic search lives in [`engine`], the table/budget/alldifferent
//! machinery in [`constraints`], and the dense kernels in [`numerics`].

pub mod cli;
pub mod constraints;
pub mod engine;
mod error;
pub mod fixtures;
pub mod numerics;
pub mod par;
pub mod prior_nmf;
pub mod smart_design;

pub use error::{Error, Result};
