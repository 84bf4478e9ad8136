//! Repair baselines: fit the unconstrained regression, then switch off
//! components until the budget holds.

use serde::{Deserialize, Serialize};

use super::instance::SmartDesignInstance;
use super::problem::DesignSolution;
use crate::error::Result;
use crate::numerics::{solve_least_squares, LeastSquaresFit};

/// How a multi-feature component's coefficients are summarized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentScore {
    /// Largest `|θ_j|` in the component.
    #[default]
    MaxAbs,
    /// `‖θ_component‖₂`
    L2,
}

impl ComponentScore {
    fn score(self, theta: &[f64]) -> f64 {
        match self {
            ComponentScore::MaxAbs => theta.iter().fold(0.0, |m, t| m.max(t.abs())),
            ComponentScore::L2 => theta.iter().map(|t| t * t).sum::<f64>().sqrt(),
        }
    }
}

fn component_scores(
    instance: &SmartDesignInstance,
    theta: &[f64],
    scoring: ComponentScore,
) -> Vec<f64> {
    (0..instance.k())
        .map(|i| scoring.score(&theta[instance.feature_range(i)]))
        .collect()
}

fn fit(instance: &SmartDesignInstance, u: &[bool]) -> Result<LeastSquaresFit> {
    solve_least_squares(&instance.x, &instance.y, &instance.expand(u))
}

fn solution(u: Vec<bool>, fit: LeastSquaresFit) -> DesignSolution {
    DesignSolution {
        u,
        theta: fit.theta,
        train_loss: fit.loss,
        test_loss: None,
    }
}

/// Basic repair: rank components once by the magnitude of their
/// unconstrained coefficients, remove the weakest until the budget holds,
/// then refit once on what is left.
pub fn baseline_l2_br(
    instance: &SmartDesignInstance,
    scoring: ComponentScore,
) -> Result<DesignSolution> {
    let budget = instance.budget();
    let mut u = vec![true; instance.k()];
    let full = fit(instance, &u)?;
    if budget.is_satisfied(&u) {
        return Ok(solution(u, full));
    }
    let scores = component_scores(instance, &full.theta, scoring);
    let mut order: Vec<usize> = (0..instance.k()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    for i in order {
        if budget.is_satisfied(&u) {
            break;
        }
        u[i] = false;
    }
    let refit = fit(instance, &u)?;
    Ok(solution(u, refit))
}

/// Orthogonal repair: repeatedly remove the active component with the
/// smallest coefficient-to-cost ratio, refitting after every removal.
pub fn baseline_l2_or(
    instance: &SmartDesignInstance,
    scoring: ComponentScore,
) -> Result<DesignSolution> {
    let budget = instance.budget();
    let weights = instance.weights();
    let mut u = vec![true; instance.k()];
    let mut current = fit(instance, &u)?;
    while !budget.is_satisfied(&u) {
        let scores = component_scores(instance, &current.theta, scoring);
        let ratio = |i: usize| {
            if weights[i] > 0.0 {
                scores[i] / weights[i]
            } else {
                f64::INFINITY
            }
        };
        let victim = (0..instance.k())
            .filter(|&i| u[i])
            .min_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)))
            .expect("an over-budget activation has an active component");
        u[victim] = false;
        current = fit(instance, &u)?;
    }
    Ok(solution(u, current))
}
