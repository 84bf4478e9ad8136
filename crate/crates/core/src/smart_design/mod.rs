//! Budget-constrained component selection for linear regression.
//!
//! Features are grouped into components, each with a cost. A feature may
//! carry a nonzero coefficient only if its component is active, and the
//! active components must stay under the budget. The search branches on
//! component activations; a node's subproblem is least squares on the
//! features whose component may still be active.

mod baselines;
mod instance;
mod problem;

pub use baselines::{baseline_l2_br, baseline_l2_or, ComponentScore};
pub use instance::{
    fold_split, generate_instance, Component, GeneratedDesign, GeneratorParams,
    SmartDesignInstance, COST_GRID, FEATURE_GRID, FOLDS, SAMPLE_GRID,
};
pub use problem::{
    branch, evaluate, generate_mask, is_leaf, solve_bagel, solve_bagel_traced, tightness, BagelRun,
    DesignSolution, LeastSquaresTrainer, ScriptedTrainer, SmartDesignProblem, SubsetTrainer,
};
