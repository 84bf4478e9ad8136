//! Generic branch, generate and learn search.
//!
//! Each node carries a partial assignment of the problem's combinatorial
//! variables. Processing a node runs, in order: problem filtering, subproblem
//! generation, training, bound pruning against the incumbent, the leaf test,
//! and finally branching. Problems plug in through [`Problem`].

mod node;
mod search;

pub use node::{Decision, DecisionValue, Node, NodeStatus};
pub use search::{
    bagel_search, bagel_search_traced, bound_prune, should_stop, BoundDecision, Incumbent,
    JsonLinesTrace, Pruning, SearchConfig, SearchOutcome, SearchStats, StopCondition, Strategy,
    TraceRecord, MONOTONICITY_TOLERANCE,
};

use crate::Result;

/// A trained subproblem: its loss and whatever model the problem needs to
/// branch and to extract a solution.
#[derive(Debug, Clone)]
pub struct Trained<M> {
    pub loss: f64,
    pub model: M,
}

/// A constrained learning problem solvable by [`bagel_search`].
///
/// Implementations must be monotonic restrictive: the hypothesis space of a
/// child's generated subproblem is contained in its parent's. Under that
/// contract (and exact training) a node's trained loss bounds the loss of
/// every leaf below it.
pub trait Problem {
    /// Domain snapshot owned by a node.
    type State: Clone;
    /// The restricted learning subproblem (e.g. a parameter mask).
    type Generated;
    type Model;
    type Solution;

    fn root_state(&self) -> Self::State;

    /// Applies a branching decision to a copy of the parent's state.
    /// Returns `false` if the decision empties a domain.
    fn apply(&self, state: &mut Self::State, decision: &Decision) -> bool;

    /// Domain filtering. Returns `false` when the node is infeasible.
    fn prune(&self, state: &mut Self::State) -> bool;

    fn generate(&self, node: &Node<Self::State>) -> Result<Self::Generated>;

    fn train(
        &self,
        node: &Node<Self::State>,
        generated: &Self::Generated,
    ) -> Result<Trained<Self::Model>>;

    /// Whether every model the node's subproblem can produce satisfies the
    /// constraints (or its trained optimum provably does).
    fn is_leaf(&self, node: &Node<Self::State>, trained: &Trained<Self::Model>) -> bool;

    /// Child decisions, in the order they should be explored.
    fn branch(
        &self,
        node: &Node<Self::State>,
        trained: &Trained<Self::Model>,
    ) -> Result<Vec<Decision>>;

    /// Maps a leaf's trained subproblem back to a solution of the original
    /// problem.
    fn extract(
        &self,
        node: &Node<Self::State>,
        generated: &Self::Generated,
        trained: Trained<Self::Model>,
    ) -> Self::Solution;

    /// Whether `train` returns the exact optimum of the subproblem, which
    /// makes bound pruning sound.
    fn exact_training(&self) -> bool {
        false
    }
}
