use serde::{Deserialize, Serialize};

use super::domain::BoolDomain;
use super::table::MAX_ENUMERATED_COMPONENTS;
use crate::error::{ensure_len, Error, Result};

/// `Σ u_i w_i < B` (or `≤ B` when not strict).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetConstraint {
    weights: Vec<f64>,
    bound: f64,
    strict: bool,
}

impl BudgetConstraint {
    pub fn new(weights: Vec<f64>, bound: f64, strict: bool) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Validation(format!(
                "budget weight must be finite and >= 0, got {w}"
            )));
        }
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Validation(format!(
                "budget bound must be > 0, got {bound}"
            )));
        }
        Ok(BudgetConstraint {
            weights,
            bound,
            strict,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    /// Whether a total cost respects the bound.
    #[inline]
    pub fn fits(&self, total: f64) -> bool {
        fits(total, self.bound, self.strict)
    }

    pub fn cost(&self, u: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(u)
            .filter(|(_, &on)| on)
            .map(|(w, _)| w)
            .sum()
    }

    pub fn is_satisfied(&self, u: &[bool]) -> bool {
        self.fits(self.cost(u))
    }

    /// Cost of the variables fixed to one, `S_c`.
    pub fn committed_cost(&self, domains: &[BoolDomain]) -> f64 {
        self.weights
            .iter()
            .zip(domains)
            .filter(|(_, d)| **d == BoolDomain::One)
            .map(|(w, _)| w)
            .sum()
    }

    /// Cost when every variable that may still be one is one.
    pub fn optimistic_cost(&self, domains: &[BoolDomain]) -> f64 {
        self.weights
            .iter()
            .zip(domains)
            .filter(|(_, d)| d.upper_bound())
            .map(|(w, _)| w)
            .sum()
    }

    pub fn propagate(&self, domains: &[BoolDomain]) -> Result<BudgetPropagation> {
        budget_propagate(domains, &self.weights, self.bound, self.strict)
    }
}

#[inline]
fn fits(total: f64, bound: f64, strict: bool) -> bool {
    if strict {
        total < bound
    } else {
        total <= bound
    }
}

/// Every `u ∈ {0,1}^k` within budget, in lexicographic order (`u_1` most
/// significant).
pub fn enumerate_budget_feasible(
    weights: &[f64],
    bound: f64,
    strict: bool,
) -> Result<Vec<Vec<bool>>> {
    if weights.len() > MAX_ENUMERATED_COMPONENTS {
        return Err(Error::Capacity {
            what: "component count",
            value: weights.len(),
            limit: MAX_ENUMERATED_COMPONENTS,
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Validation("budget weights must be >= 0".into()));
    }
    let mut out = Vec::new();
    if !fits(0.0, bound, strict) {
        return Ok(out);
    }
    let mut current = vec![false; weights.len()];
    extend_feasible(weights, bound, strict, 0, 0.0, &mut current, &mut out);
    Ok(out)
}

// Weights are non-negative, so an infeasible prefix has no feasible
// extension and the 1-branch can be cut as soon as it overflows.
fn extend_feasible(
    weights: &[f64],
    bound: f64,
    strict: bool,
    depth: usize,
    total: f64,
    current: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) {
    if depth == weights.len() {
        out.push(current.clone());
        return;
    }
    extend_feasible(weights, bound, strict, depth + 1, total, current, out);
    let with = total + weights[depth];
    if fits(with, bound, strict) {
        current[depth] = true;
        extend_feasible(weights, bound, strict, depth + 1, with, current, out);
        current[depth] = false;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BudgetPropagation {
    /// Variables that must be fixed to zero.
    pub fixings: Vec<usize>,
    /// The committed cost alone already breaks the budget.
    pub failed: bool,
}

/// With `S_c` the weight of the variables fixed to one, every unfixed `u_i`
/// with `w_i + S_c` over budget can only be zero. A single pass reaches the
/// fixpoint because fixing to zero leaves `S_c` unchanged.
pub fn budget_propagate(
    domains: &[BoolDomain],
    weights: &[f64],
    bound: f64,
    strict: bool,
) -> Result<BudgetPropagation> {
    ensure_len("budget propagation", weights.len(), domains.len())?;
    let committed: f64 = weights
        .iter()
        .zip(domains)
        .filter(|(_, d)| **d == BoolDomain::One)
        .map(|(w, _)| w)
        .sum();
    if !fits(committed, bound, strict) {
        return Ok(BudgetPropagation {
            fixings: Vec::new(),
            failed: true,
        });
    }
    let fixings = domains
        .iter()
        .zip(weights)
        .enumerate()
        .filter(|(_, (d, w))| **d == BoolDomain::Both && !fits(*w + committed, bound, strict))
        .map(|(i, _)| i)
        .collect();
    Ok(BudgetPropagation {
        fixings,
        failed: false,
    })
}

impl BudgetPropagation {
    /// Applies the fixings; returns `false` when the propagation failed.
    pub fn apply(&self, domains: &mut [BoolDomain]) -> bool {
        if self.failed {
            return false;
        }
        for &i in &self.fixings {
            let ok = domains[i].fix(false);
            debug_assert!(ok);
        }
        true
    }
}
