mod common;

use bagel::engine::{
    bagel_search, bagel_search_traced, Pruning, SearchConfig, StopCondition, Strategy,
};
use bagel::numerics::{solve_least_squares, Rng};
use bagel::smart_design::{
    baseline_l2_br, baseline_l2_or, generate_instance, ComponentScore, GeneratorParams,
    SmartDesignInstance, SmartDesignProblem,
};
use common::{brute_force_best, expand, within_budget};

fn instance(seed: u64) -> SmartDesignInstance {
    let mut rng = Rng::new(seed);
    let n = 4 + rng.below(20);
    let mut p = GeneratorParams::new(n, n + 10 + rng.below(60), rng.uniform(0.2, 0.9), seed);
    p.components = Some(2 + rng.below(n.min(8) - 1));
    generate_instance(&p).unwrap().instance
}

fn config(pruning: Pruning, strategy: Strategy) -> SearchConfig {
    SearchConfig {
        stop: StopCondition::unbounded(),
        strategy,
        pruning,
    }
}

#[test]
fn pruning_does_not_change_the_optimum() {
    for seed in 0..25 {
        let inst = instance(seed);
        let problem = SmartDesignProblem::new(&inst);
        let mut losses = Vec::new();
        let mut nodes = Vec::new();
        for pruning in [Pruning::Exact, Pruning::Off] {
            for strategy in [Strategy::DepthFirst, Strategy::BestFirst] {
                let out = bagel_search(&problem, &config(pruning, strategy)).unwrap();
                assert!(out.stats.completed);
                losses.push(out.best.unwrap().loss);
                nodes.push(out.stats.nodes_opened);
            }
        }
        let (_, oracle) = brute_force_best(&inst);
        for l in &losses {
            assert!(
                (l - oracle).abs() <= 1e-9 * oracle,
                "seed {seed}: {l} vs {oracle}"
            );
        }
        assert!(nodes[0] <= nodes[2]);
    }
}

#[test]
fn incumbent_history_decreases() {
    for seed in 30..40 {
        let inst = instance(seed);
        let out = bagel_search(
            &SmartDesignProblem::new(&inst),
            &config(Pruning::Off, Strategy::DepthFirst),
        )
        .unwrap();
        for w in out.incumbent_history.windows(2) {
            assert!(w[1].1 < w[0].1);
        }
    }
}

#[test]
fn depth_first_visits_in_preorder() {
    for seed in 40..50 {
        let inst = instance(seed);
        let mut trails: Vec<Vec<String>> = Vec::new();
        bagel_search_traced(
            &SmartDesignProblem::new(&inst),
            &config(Pruning::Exact, Strategy::DepthFirst),
            &mut |r| trails.push(r.trail.clone()),
        )
        .unwrap();
        assert!(trails[0].is_empty());
        for w in trails.windows(2) {
            let parent = &w[1][..w[1].len() - 1];
            assert!(w[0].starts_with(parent), "{:?} then {:?}", w[0], w[1]);
        }
    }
}

#[test]
fn every_solution_is_feasible() {
    for seed in 50..70 {
        let inst = instance(seed);
        let out = bagel_search(
            &SmartDesignProblem::new(&inst),
            &config(Pruning::Exact, Strategy::BestFirst),
        )
        .unwrap();
        let sol = out.best.unwrap().solution;
        let weights = inst.weights();
        assert!(within_budget(&sol.u, &weights, inst.bound, inst.strict));
        let mask = expand(&inst, &sol.u);
        assert!(sol.theta.iter().zip(&mask).all(|(t, &on)| on || *t == 0.0));
    }
}

#[test]
fn node_cap_stops_early() {
    let inst = instance(3);
    let out = bagel_search(
        &SmartDesignProblem::new(&inst),
        &SearchConfig {
            stop: StopCondition::nodes(1),
            ..SearchConfig::default()
        },
    )
    .unwrap();
    assert_eq!(out.stats.nodes_opened, 1);
    assert!(!out.stats.completed);
}

fn max_abs_scores(inst: &SmartDesignInstance, u: &[bool]) -> Vec<f64> {
    let fit = solve_least_squares(&inst.x, &inst.y, &expand(inst, u)).unwrap();
    let mut start = 0;
    inst.components
        .iter()
        .map(|c| {
            let s = fit.theta[start..start + c.size]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            start += c.size;
            s
        })
        .collect()
}

/// Remove the weakest components of one fit until the budget holds.
fn greedy_once(inst: &SmartDesignInstance) -> Vec<bool> {
    let k = inst.components.len();
    let mut u = vec![true; k];
    let scores = max_abs_scores(inst, &u);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    for i in order {
        if within_budget(&u, &inst.weights(), inst.bound, inst.strict) {
            break;
        }
        u[i] = false;
    }
    u
}

/// Refit after each removal, removing the lowest score per unit cost.
fn greedy_refit(inst: &SmartDesignInstance) -> Vec<bool> {
    let weights = inst.weights();
    let mut u = vec![true; weights.len()];
    while !within_budget(&u, &weights, inst.bound, inst.strict) {
        let scores = max_abs_scores(inst, &u);
        let victim = (0..u.len())
            .filter(|&i| u[i])
            .min_by(|&a, &b| {
                let ra = if weights[a] == 0.0 {
                    f64::INFINITY
                } else {
                    scores[a] / weights[a]
                };
                let rb = if weights[b] == 0.0 {
                    f64::INFINITY
                } else {
                    scores[b] / weights[b]
                };
                ra.total_cmp(&rb).then(a.cmp(&b))
            })
            .unwrap();
        u[victim] = false;
    }
    u
}

#[test]
fn baselines_match_reference_greedy() {
    for seed in 100..130 {
        let inst = instance(seed);
        let br = baseline_l2_br(&inst, ComponentScore::MaxAbs).unwrap();
        let or = baseline_l2_or(&inst, ComponentScore::MaxAbs).unwrap();
        assert_eq!(br.u, greedy_once(&inst), "seed {seed}");
        assert_eq!(or.u, greedy_refit(&inst), "seed {seed}");
        let (_, at_br) = common::masked_lstsq(&inst.x, &inst.y, &expand(&inst, &br.u));
        assert!((br.train_loss - at_br).abs() <= 1e-9 * at_br.max(1.0));
    }
}

#[test]
fn root_loss_bounds_every_leaf() {
    for seed in 200..210 {
        let inst = instance(seed);
        let mut root = None;
        let mut leaves = Vec::new();
        bagel_search_traced(
            &SmartDesignProblem::new(&inst),
            &config(Pruning::Off, Strategy::DepthFirst),
            &mut |r| {
                if r.trail.is_empty() {
                    root = r.loss;
                }
                if r.status == bagel::engine::NodeStatus::Leaf {
                    leaves.push(r.loss.unwrap());
                }
            },
        )
        .unwrap();
        let root = root.unwrap();
        assert!(leaves.iter().all(|l| root <= l + 1e-9));
    }
}
