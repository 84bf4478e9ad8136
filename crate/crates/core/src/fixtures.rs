//! Small hand-checkable instances shared by unit tests, integration tests
//! and the CLI's `--fixture` option.

use crate::engine::NodeStatus;
use crate::numerics::{Matrix, Rng, Vector};
use crate::smart_design::{Component, ScriptedTrainer, SmartDesignInstance};

/// Four components of input sizes 4096, 1024, 1024, 10 with costs
/// 10, 6, 5, 1 and budget 12.
pub fn toy_components() -> (Vec<Component>, f64) {
    (components(&[4096, 1024, 1024, 10]), 12.0)
}

fn components(sizes: &[usize]) -> Vec<Component> {
    sizes
        .iter()
        .zip([10.0, 6.0, 5.0, 1.0])
        .map(|(&size, weight)| Component { size, weight })
        .collect()
}

/// The toy costs and budget with input sizes shrunk to 3, 2, 2, 1 and a
/// fixed random design of 16 samples.
pub fn toy_shrunk_instance() -> SmartDesignInstance {
    let mut rng = Rng::new(20);
    let x = Matrix::from_fn(16, 8, |_, _| rng.normal(0.0, 1.0));
    let theta = [0.8, -0.5, 0.3, 1.2, -0.7, 0.4, 0.9, -1.1];
    let y: Vec<f64> = (0..16)
        .map(|i| x.row(i).iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + rng.normal(0.0, 0.1))
        .collect();
    SmartDesignInstance::new(
        x,
        Vector::new(y).expect("finite targets"),
        components(&[3, 2, 2, 1]),
        12.0,
        true,
        20,
        0.1,
    )
    .expect("valid toy instance")
}

/// Trained losses of the hand-worked toy search, keyed by decision trail.
pub fn toy_search_trainer() -> ScriptedTrainer {
    ScriptedTrainer::new([
        ("", 0.12),
        ("u1=0", 0.14),
        ("u1=0,u2=0", 0.21),
        ("u1=0,u2=1", 0.22),
        ("u1=1", 0.19),
    ])
}

/// Node sequence the depth-first search visits on [`toy_search_trainer`]:
/// trail, loss and final status.
pub fn toy_search_expected_order() -> Vec<(Vec<&'static str>, f64, NodeStatus)> {
    vec![
        (vec![], 0.12, NodeStatus::Trained),
        (vec!["u1=0"], 0.14, NodeStatus::Trained),
        (vec!["u1=0", "u2=0"], 0.21, NodeStatus::Leaf),
        (vec!["u1=0", "u2=1"], 0.22, NodeStatus::Pruned),
        (vec!["u1=1"], 0.19, NodeStatus::Leaf),
    ]
}

pub const TOY_SEARCH_OPTIMUM: f64 = 0.19;
