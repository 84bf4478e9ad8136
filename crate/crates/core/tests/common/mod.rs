//! Oracles written without the crate's solvers.
#![allow(dead_code)]

use bagel::numerics::Matrix;
use bagel::smart_design::SmartDesignInstance;
use nalgebra::{DMatrix, DVector};

/// Minimum-norm least squares via the SVD pseudo-inverse on the masked
/// columns; returns `(theta, ‖Xθ − y‖₂)`.
pub fn masked_lstsq(x: &Matrix, y: &[f64], mask: &[bool]) -> (Vec<f64>, f64) {
    let cols: Vec<usize> = (0..x.cols()).filter(|&j| mask[j]).collect();
    let m = x.rows();
    let mut theta = vec![0.0; x.cols()];
    if !cols.is_empty() && m > 0 {
        let a = DMatrix::from_fn(m, cols.len(), |i, j| x[(i, cols[j])]);
        let b = DVector::from_column_slice(y);
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let eps = f64::EPSILON * m.max(cols.len()) as f64 * smax;
        let sol = svd.solve(&b, eps).expect("svd has both factors");
        for (k, &j) in cols.iter().enumerate() {
            theta[j] = sol[k];
        }
    }
    let loss = (0..m)
        .map(|i| {
            let pred: f64 = (0..x.cols()).map(|j| x[(i, j)] * theta[j]).sum();
            (pred - y[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    (theta, loss)
}

/// Every activation vector of `k` components.
pub fn all_subsets(k: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << k).map(move |bits| (0..k).map(|i| bits >> i & 1 == 1).collect())
}

pub fn within_budget(u: &[bool], weights: &[f64], bound: f64, strict: bool) -> bool {
    let total: f64 = u
        .iter()
        .zip(weights)
        .filter(|(on, _)| **on)
        .map(|(_, w)| w)
        .sum();
    if strict {
        total < bound
    } else {
        total <= bound
    }
}

/// Feature mask of an activation vector.
pub fn expand(instance: &SmartDesignInstance, u: &[bool]) -> Vec<bool> {
    instance
        .components
        .iter()
        .zip(u)
        .flat_map(|(c, &on)| std::iter::repeat_n(on, c.size))
        .collect()
}

/// Lowest loss over every budget-feasible activation, by enumeration.
pub fn brute_force_best(instance: &SmartDesignInstance) -> (Vec<bool>, f64) {
    let weights: Vec<f64> = instance.components.iter().map(|c| c.weight).collect();
    let mut best: Option<(Vec<bool>, f64)> = None;
    for u in all_subsets(instance.components.len()) {
        if !within_budget(&u, &weights, instance.bound, instance.strict) {
            continue;
        }
        let (_, loss) = masked_lstsq(&instance.x, &instance.y, &expand(instance, &u));
        if best.as_ref().is_none_or(|(_, b)| loss < *b) {
            best = Some((u, loss));
        }
    }
    best.expect("the empty activation is always feasible")
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}
