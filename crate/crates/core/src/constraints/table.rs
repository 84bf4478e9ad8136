//! Extended table constraints.
//!
//! `ET(y, T, c, a)` holds when some tuple `t ∈ T` is within cost `a` of `y`,
//! i.e. `c(y, t) ≤ a`. With `a = 0` and the Euclidean distance this is the
//! classical table constraint; other cost functions let the same structure
//! express norm balls, support patterns and similar learning constraints.

use serde::{Deserialize, Serialize};

use super::budget::enumerate_budget_feasible;
use crate::error::{ensure_len, Error, Result};
use crate::numerics::{lp_distance, masked_l0_cost, masked_lp_norm, Vector};

/// Cost `c(y, t)` between a candidate vector and a table tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostFn {
    /// `‖y ∘ t̄‖₀`: entries of `y` above `eps` outside the pattern `t`.
    MaskedL0 { eps: f64 },
    /// `‖y − t‖_p`
    LpDistance { p: f64 },
    /// `‖y ∘ t̄‖_p`, a graded version of `MaskedL0` used to rank tuples.
    MaskedLp { p: f64 },
}

impl CostFn {
    pub const MASKED_L0: CostFn = CostFn::MaskedL0 { eps: 0.0 };
    pub const EUCLIDEAN: CostFn = CostFn::LpDistance { p: 2.0 };

    pub fn eval(&self, y: &[f64], t: &[f64]) -> Result<f64> {
        match *self {
            CostFn::MaskedL0 { eps } => masked_l0_cost(y, t, eps).map(|c| c as f64),
            CostFn::LpDistance { p } => lp_distance(y, t, p),
            CostFn::MaskedLp { p } => masked_lp_norm(y, t, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedTable {
    arity: usize,
    tuples: Vec<Vector>,
    cost: CostFn,
    threshold: f64,
}

impl ExtendedTable {
    pub fn new(arity: usize, tuples: Vec<Vector>, cost: CostFn, threshold: f64) -> Result<Self> {
        for t in &tuples {
            ensure_len("table tuple", arity, t.len())?;
        }
        if !(threshold >= 0.0) {
            return Err(Error::Validation(format!(
                "table threshold must be >= 0, got {threshold}"
            )));
        }
        Ok(ExtendedTable {
            arity,
            tuples,
            cost,
            threshold,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &[Vector] {
        &self.tuples
    }

    pub fn cost(&self) -> CostFn {
        self.cost
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Lowest index of a tuple within the threshold, or `None` when `y`
    /// violates the constraint.
    pub fn satisfied_by(&self, y: &[f64]) -> Result<Option<usize>> {
        ensure_len("extended table check", self.arity, y.len())?;
        for (i, t) in self.tuples.iter().enumerate() {
            if self.cost.eval(y, t)? <= self.threshold {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Every tuple index with its `order_cost` to `y`, ascending by cost;
    /// ties keep ascending index order.
    pub fn rank_tuples(&self, y: &[f64], order_cost: CostFn) -> Result<Vec<(usize, f64)>> {
        ensure_len("extended table ranking", self.arity, y.len())?;
        let mut ranked = self
            .tuples
            .iter()
            .enumerate()
            .map(|(i, t)| order_cost.eval(y, t).map(|c| (i, c)))
            .collect::<Result<Vec<_>>>()?;
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(ranked)
    }
}

/// `‖θ‖_p ≤ λ` as `ET(θ, {0}, ‖y − t‖_p, λ)`.
pub fn encode_norm_ball(p: f64, lambda: f64, dim: usize) -> Result<ExtendedTable> {
    ExtendedTable::new(
        dim,
        vec![Vector::zeros(dim)],
        CostFn::LpDistance { p },
        lambda,
    )
}

pub const MAX_TABLE_ARITY: usize = 1_000_000;
pub const MAX_ENUMERATED_COMPONENTS: usize = 25;

/// Support coupling plus budget of the smart design problem as one table.
///
/// Each budget-feasible activation vector `u` becomes a tuple in which the
/// value `u_i` is repeated over the `input_size` coordinates of component
/// `i`. A parameter vector then satisfies the table under `‖y ∘ t̄‖₀ ≤ 0`
/// exactly when its support is covered by some affordable set of
/// components.
pub fn encode_smart_design(
    components: &[(usize, f64)],
    bound: f64,
    strict: bool,
) -> Result<ExtendedTable> {
    if components.len() > MAX_ENUMERATED_COMPONENTS {
        return Err(Error::Capacity {
            what: "component count",
            value: components.len(),
            limit: MAX_ENUMERATED_COMPONENTS,
        });
    }
    let arity: usize = components.iter().map(|c| c.0).sum();
    if arity > MAX_TABLE_ARITY {
        return Err(Error::Capacity {
            what: "table arity",
            value: arity,
            limit: MAX_TABLE_ARITY,
        });
    }
    let weights: Vec<f64> = components.iter().map(|c| c.1).collect();
    let feasible = enumerate_budget_feasible(&weights, bound, strict)?;
    let tuples = feasible
        .into_iter()
        .map(|u| {
            let mut t = Vec::with_capacity(arity);
            for (&on, &(size, _)) in u.iter().zip(components) {
                t.extend(std::iter::repeat_n(if on { 1.0 } else { 0.0 }, size));
            }
            Vector::from_raw(t)
        })
        .collect();
    ExtendedTable::new(arity, tuples, CostFn::MASKED_L0, 0.0)
}
