use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::instance::SmartDesignInstance;
use crate::constraints::{BoolDomain, BudgetConstraint};
use crate::engine::{
    bagel_search_traced, Decision, DecisionValue, Node, Problem, SearchConfig, SearchStats,
    TraceRecord, Trained,
};
use crate::error::{Error, Result};
use crate::numerics::{residual_norm, solve_least_squares, Matrix, Vector};

/// A budget-feasible regression model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    /// Component activations.
    pub u: Vec<bool>,
    /// Zero on every feature of an inactive component.
    pub theta: Vector,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
}

/// Feature mask `ub(u)` of a node: a feature stays trainable while its
/// component may still be active.
pub fn generate_mask(domains: &[BoolDomain], instance: &SmartDesignInstance) -> Vec<bool> {
    let u: Vec<bool> = domains.iter().map(|d| d.upper_bound()).collect();
    instance.expand(&u)
}

/// A node is a leaf when even activating every component that is still
/// allowed stays within budget, so every model of its subproblem is
/// feasible.
pub fn is_leaf(domains: &[BoolDomain], budget: &BudgetConstraint) -> bool {
    budget.fits(budget.optimistic_cost(domains))
}

/// `u_i = 0` then `u_i = 1` on the lowest-index unfixed variable.
pub fn branch(domains: &[BoolDomain]) -> Result<[Decision; 2]> {
    let i = domains
        .iter()
        .position(|d| !d.is_fixed())
        .ok_or_else(|| Error::Contract("branching on a node with every component fixed".into()))?;
    Ok([
        Decision::fix(i, false, format!("u{}=0", i + 1)),
        Decision::fix(i, true, format!("u{}=1", i + 1)),
    ])
}

/// `Σ u_i w_i / B`
pub fn tightness(u: &[bool], weights: &[f64], bound: f64) -> f64 {
    let used: f64 = weights
        .iter()
        .zip(u)
        .filter(|(_, &on)| on)
        .map(|(w, _)| w)
        .sum();
    used / bound
}

/// `‖X_test θ − y_test‖₂`
pub fn evaluate(solution: &DesignSolution, x_test: &Matrix, y_test: &[f64]) -> Result<f64> {
    residual_norm(x_test, &solution.theta, y_test)
}

/// Trains the regression restricted to a feature mask.
pub trait SubsetTrainer {
    fn train(
        &self,
        instance: &SmartDesignInstance,
        mask: &[bool],
        node: &Node<Vec<BoolDomain>>,
    ) -> Result<Trained<Vector>>;

    fn exact(&self) -> bool;
}

/// Exact masked least squares.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeastSquaresTrainer;

impl SubsetTrainer for LeastSquaresTrainer {
    fn train(
        &self,
        instance: &SmartDesignInstance,
        mask: &[bool],
        _node: &Node<Vec<BoolDomain>>,
    ) -> Result<Trained<Vector>> {
        let fit = solve_least_squares(&instance.x, &instance.y, mask)?;
        Ok(Trained {
            loss: fit.loss,
            model: fit.theta,
        })
    }

    fn exact(&self) -> bool {
        true
    }
}

/// Replays fixed losses keyed by the node's decision trail (labels joined
/// with `,`; the root is the empty string). Used to replay hand-written
/// search traces with the real propagation and leaf logic.
#[derive(Debug, Clone, Default)]
pub struct ScriptedTrainer {
    pub losses: BTreeMap<String, f64>,
}

impl ScriptedTrainer {
    pub fn new<'a>(entries: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        ScriptedTrainer {
            losses: entries
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

impl SubsetTrainer for ScriptedTrainer {
    fn train(
        &self,
        instance: &SmartDesignInstance,
        _mask: &[bool],
        node: &Node<Vec<BoolDomain>>,
    ) -> Result<Trained<Vector>> {
        let key = node.trail_labels().join(",");
        let loss = *self
            .losses
            .get(&key)
            .ok_or_else(|| Error::Contract(format!("no scripted loss for trail [{key}]")))?;
        Ok(Trained {
            loss,
            model: Vector::zeros(instance.features()),
        })
    }

    fn exact(&self) -> bool {
        true
    }
}

/// The smart design problem as a search problem over component activations.
pub struct SmartDesignProblem<'a, T = LeastSquaresTrainer> {
    instance: &'a SmartDesignInstance,
    budget: BudgetConstraint,
    trainer: T,
}

impl<'a> SmartDesignProblem<'a, LeastSquaresTrainer> {
    pub fn new(instance: &'a SmartDesignInstance) -> Self {
        Self::with_trainer(instance, LeastSquaresTrainer)
    }
}

impl<'a, T: SubsetTrainer> SmartDesignProblem<'a, T> {
    pub fn with_trainer(instance: &'a SmartDesignInstance, trainer: T) -> Self {
        SmartDesignProblem {
            instance,
            budget: instance.budget(),
            trainer,
        }
    }

    pub fn instance(&self) -> &SmartDesignInstance {
        self.instance
    }
}

impl<T: SubsetTrainer> Problem for SmartDesignProblem<'_, T> {
    type State = Vec<BoolDomain>;
    type Generated = Vec<bool>;
    type Model = Vector;
    type Solution = DesignSolution;

    fn root_state(&self) -> Vec<BoolDomain> {
        vec![BoolDomain::Both; self.instance.k()]
    }

    fn apply(&self, state: &mut Vec<BoolDomain>, decision: &Decision) -> bool {
        match decision.value {
            DecisionValue::Fix(v) => state[decision.variable].fix(v),
            DecisionValue::Assign(_) => false,
        }
    }

    fn prune(&self, state: &mut Vec<BoolDomain>) -> bool {
        self.budget
            .propagate(state)
            .map(|p| p.apply(state))
            .unwrap_or(false)
    }

    fn generate(&self, node: &Node<Vec<BoolDomain>>) -> Result<Vec<bool>> {
        Ok(generate_mask(&node.state, self.instance))
    }

    fn train(&self, node: &Node<Vec<BoolDomain>>, mask: &Vec<bool>) -> Result<Trained<Vector>> {
        self.trainer.train(self.instance, mask, node)
    }

    fn is_leaf(&self, node: &Node<Vec<BoolDomain>>, _trained: &Trained<Vector>) -> bool {
        is_leaf(&node.state, &self.budget)
    }

    fn branch(
        &self,
        node: &Node<Vec<BoolDomain>>,
        _trained: &Trained<Vector>,
    ) -> Result<Vec<Decision>> {
        Ok(branch(&node.state)?.to_vec())
    }

    fn extract(
        &self,
        node: &Node<Vec<BoolDomain>>,
        mask: &Vec<bool>,
        trained: Trained<Vector>,
    ) -> DesignSolution {
        let mut theta = trained.model.into_inner();
        for (t, &on) in theta.iter_mut().zip(mask) {
            if !on {
                *t = 0.0;
            }
        }
        DesignSolution {
            u: node.state.iter().map(|d| d.upper_bound()).collect(),
            theta: Vector::from_raw(theta),
            train_loss: trained.loss,
            test_loss: None,
        }
    }

    fn exact_training(&self) -> bool {
        self.trainer.exact()
    }
}

/// Result of one search-based solve.
#[derive(Debug, Clone)]
pub struct BagelRun {
    pub solution: Option<DesignSolution>,
    pub stats: SearchStats,
}

pub fn solve_bagel(instance: &SmartDesignInstance, config: &SearchConfig) -> Result<BagelRun> {
    solve_bagel_traced(instance, config, &mut |_| {})
}

pub fn solve_bagel_traced(
    instance: &SmartDesignInstance,
    config: &SearchConfig,
    trace: &mut dyn FnMut(&TraceRecord),
) -> Result<BagelRun> {
    let problem = SmartDesignProblem::new(instance);
    let outcome = bagel_search_traced(&problem, config, trace)?;
    Ok(BagelRun {
        solution: outcome.best.map(|b| b.solution),
        stats: outcome.stats,
    })
}
