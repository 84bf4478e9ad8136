mod common;

use bagel::constraints::{
    alldifferent_filter, budget_propagate, enumerate_budget_feasible, BoolDomain, CostFn,
    ExtendedTable, IntDomain,
};
use bagel::numerics::{
    nmf_multiplicative_observed, reconstruction_loss, solve_least_squares, Matrix, Rng, Vector,
};
use common::{all_subsets, masked_lstsq, within_budget};
use proptest::prelude::*;

fn design(rows: usize, cols: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = Rng::new(seed);
    let x = Matrix::from_fn(rows, cols, |_, _| rng.normal(0.0, 1.0));
    let y = (0..rows).map(|_| rng.normal(0.0, 2.0)).collect();
    (x, y)
}

proptest! {
    #[test]
    fn residual_is_orthogonal_to_active_columns(
        rows in 1usize..30, cols in 1usize..12, seed in any::<u64>(), bits in any::<u16>()
    ) {
        let (x, y) = design(rows, cols, seed);
        let mask: Vec<bool> = (0..cols).map(|j| bits >> j & 1 == 1).collect();
        let fit = solve_least_squares(&x, &y, &mask).unwrap();
        let pred = x.mul_vec(&fit.theta).unwrap();
        let r: Vec<f64> = pred.iter().zip(&y).map(|(p, t)| p - t).collect();
        let scale = x.frobenius_norm() * y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in (0..cols).filter(|&j| mask[j]) {
            let dot: f64 = (0..rows).map(|i| x[(i, j)] * r[i]).sum();
            prop_assert!(dot.abs() <= 1e-8 * scale.max(1.0));
        }
        for j in (0..cols).filter(|&j| !mask[j]) {
            prop_assert_eq!(fit.theta[j], 0.0);
        }
    }

    #[test]
    fn loss_matches_pseudo_inverse(
        rows in 1usize..30, cols in 1usize..12, seed in any::<u64>(), bits in any::<u16>()
    ) {
        let (x, y) = design(rows, cols, seed);
        let mask: Vec<bool> = (0..cols).map(|j| bits >> j & 1 == 1).collect();
        let fit = solve_least_squares(&x, &y, &mask).unwrap();
        let (theta, loss) = masked_lstsq(&x, &y, &mask);
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((fit.loss - loss).abs() <= 1e-9 * ynorm.max(1.0));
        // both are the minimum-norm solution
        let diff: f64 = theta.iter().zip(fit.theta.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let size = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-6 * size.max(1.0));
    }

    #[test]
    fn widening_the_mask_never_hurts(
        rows in 1usize..30, cols in 1usize..10, seed in any::<u64>(), a in any::<u16>(), b in any::<u16>()
    ) {
        let (x, y) = design(rows, cols, seed);
        let small: Vec<bool> = (0..cols).map(|j| a >> j & 1 == 1 && b >> j & 1 == 1).collect();
        let large: Vec<bool> = (0..cols).map(|j| a >> j & 1 == 1).collect();
        let ls = solve_least_squares(&x, &y, &small).unwrap().loss;
        let ll = solve_least_squares(&x, &y, &large).unwrap().loss;
        prop_assert!(ll <= ls + 1e-9 * ls.max(1.0));
    }

    #[test]
    fn budget_enumeration_is_exact_and_downward_closed(
        weights in prop::collection::vec(0.0f64..10.0, 1..9), frac in 0.05f64..1.2, strict in any::<bool>()
    ) {
        let bound = frac * weights.iter().sum::<f64>() + 1e-3;
        let listed = enumerate_budget_feasible(&weights, bound, strict).unwrap();
        let brute: Vec<Vec<bool>> = all_subsets(weights.len())
            .filter(|u| within_budget(u, &weights, bound, strict))
            .collect();
        prop_assert_eq!(listed.len(), brute.len());
        for u in &listed {
            prop_assert!(brute.contains(u));
            for i in (0..u.len()).filter(|&i| u[i]) {
                let mut v = u.clone();
                v[i] = false;
                prop_assert!(listed.contains(&v));
            }
        }
    }

    #[test]
    fn budget_propagation_only_removes_infeasible_values(
        weights in prop::collection::vec(0.0f64..10.0, 1..10),
        states in prop::collection::vec(0u8..3, 10),
        bound in 0.5f64..30.0,
    ) {
        let k = weights.len();
        let domains: Vec<BoolDomain> = states[..k]
            .iter()
            .map(|s| [BoolDomain::Zero, BoolDomain::One, BoolDomain::Both][*s as usize])
            .collect();
        let prop = budget_propagate(&domains, &weights, bound, true).unwrap();
        let mut after = domains.clone();
        let alive = prop.apply(&mut after);
        let feasible: Vec<Vec<bool>> = all_subsets(k)
            .filter(|u| u.iter().zip(&domains).all(|(v, d)| d.contains(*v)))
            .filter(|u| within_budget(u, &weights, bound, true))
            .collect();
        if !alive {
            prop_assert!(feasible.is_empty());
        }
        for u in &feasible {
            prop_assert!(u.iter().zip(&after).all(|(v, d)| d.contains(*v)));
        }
        // a second pass finds nothing new
        if alive {
            prop_assert!(budget_propagate(&after, &weights, bound, true).unwrap().fixings.is_empty());
        }
    }

    #[test]
    fn alldifferent_keeps_every_solution(
        raw in prop::collection::vec(prop::collection::vec(0usize..5, 1..5), 1..5)
    ) {
        let domains: Vec<IntDomain> = raw.iter().map(|v| IntDomain::from_values(v.clone())).collect();
        let mut filtered = domains.clone();
        let outcome = alldifferent_filter(&mut filtered);
        let mut solutions = Vec::new();
        let mut stack = vec![Vec::<usize>::new()];
        while let Some(partial) = stack.pop() {
            if partial.len() == domains.len() {
                solutions.push(partial);
                continue;
            }
            for v in domains[partial.len()].iter() {
                if !partial.contains(&v) {
                    let mut next = partial.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
        if outcome.failed {
            prop_assert!(solutions.is_empty());
        } else {
            for s in &solutions {
                prop_assert!(s.iter().zip(&filtered).all(|(v, d)| d.contains(*v)));
            }
            let mut again = filtered.clone();
            let second = alldifferent_filter(&mut again);
            prop_assert!(!second.failed && second.pruned.is_empty());
            prop_assert_eq!(again, filtered);
        }
    }

    #[test]
    fn table_witness_is_lowest_index(
        tuples in prop::collection::vec(prop::collection::vec(0u8..3, 3), 1..8),
        y in prop::collection::vec(0u8..3, 3),
    ) {
        let as_f = |v: &[u8]| v.iter().map(|&b| b as f64).collect::<Vec<f64>>();
        let table = ExtendedTable::new(
            3,
            tuples.iter().map(|t| Vector::new(as_f(t)).unwrap()).collect(),
            CostFn::EUCLIDEAN,
            0.0,
        )
        .unwrap();
        prop_assert_eq!(table.satisfied_by(&as_f(&y)).unwrap(), tuples.iter().position(|t| *t == y));
        let ranked = table.rank_tuples(&as_f(&y), CostFn::EUCLIDEAN).unwrap();
        prop_assert_eq!(ranked.len(), tuples.len());
        for w in ranked.windows(2) {
            prop_assert!(w[0].1 < w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }

    #[test]
    fn nmf_loss_never_rises(n in 1usize..12, m in 1usize..12, k in 1usize..4, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let a = Matrix::from_fn(n, m, |_, _| rng.uniform(0.0, 3.0));
        let mask = Matrix::from_fn(n, k, |_, _| if rng.bernoulli(0.7) { 1.0 } else { 0.0 });
        let mut losses = Vec::new();
        let fit = nmf_multiplicative_observed(&a, k, &mask, 60, &mut rng, |_, w, h| {
            losses.push(reconstruction_loss(&a, w, h).unwrap());
        })
        .unwrap();
        prop_assert_eq!(losses.len(), 61);
        for w in losses.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0));
        }
        prop_assert_eq!(fit.loss, *losses.last().unwrap());
    }
}

#[test]
fn pseudo_inverse_example() {
    let x = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
    let fit = solve_least_squares(&x, &[1.0, 3.0], &[true]).unwrap();
    let (theta, loss) = masked_lstsq(&x, &[1.0, 3.0], &[true]);
    assert!((fit.theta[0] - theta[0]).abs() < 1e-12);
    assert!((fit.loss - loss).abs() < 1e-12);
    assert!((loss - 2f64.sqrt()).abs() < 1e-12);
}
