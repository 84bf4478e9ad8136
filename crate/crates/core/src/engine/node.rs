use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecisionValue {
    /// Fix a Boolean variable.
    Fix(bool),
    /// Assign an integer variable.
    Assign(usize),
}

/// One branching step: restrict `variable` to `value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decision {
    pub variable: usize,
    pub value: DecisionValue,
    pub label: String,
}

impl Decision {
    pub fn fix(variable: usize, value: bool, label: impl Into<String>) -> Self {
        Decision {
            variable,
            value: DecisionValue::Fix(value),
            label: label.into(),
        }
    }

    pub fn assign(variable: usize, value: usize, label: impl Into<String>) -> Self {
        Decision {
            variable,
            value: DecisionValue::Assign(value),
            label: label.into(),
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeStatus {
    Open,
    Trained,
    Leaf,
    Pruned,
    Failed,
}

/// A search tree node. `state` is the problem's own domain snapshot; a
/// child receives a copy of its parent's state with one more decision
/// applied.
#[derive(Debug, Clone)]
pub struct Node<S> {
    pub id: usize,
    pub depth: usize,
    pub trail: Vec<Decision>,
    pub state: S,
    pub loss: Option<f64>,
    pub status: NodeStatus,
    /// Trained loss of the parent, used for best-first ordering and to
    /// check monotonic restriction.
    pub parent_loss: Option<f64>,
}

impl<S> Node<S> {
    pub fn root(state: S) -> Self {
        Node {
            id: 0,
            depth: 0,
            trail: Vec::new(),
            state,
            loss: None,
            status: NodeStatus::Open,
            parent_loss: None,
        }
    }

    pub fn trail_labels(&self) -> Vec<String> {
        self.trail.iter().map(|d| d.label.clone()).collect()
    }
}
