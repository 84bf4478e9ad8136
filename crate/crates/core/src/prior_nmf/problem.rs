use serde::{Deserialize, Serialize};

use super::instance::{topic_recovery, NmfInstance, TopicDb};
use crate::constraints::{alldifferent_filter, CostFn, ExtendedTable, IntDomain};
use crate::engine::{
    bagel_search_traced, Decision, DecisionValue, Node, Problem, SearchConfig, SearchStats,
    TraceRecord, Trained,
};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, nmf_multiplicative, Matrix, NmfFit, Rng};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub iters: usize,
    /// Random restarts per node; the lowest loss is kept.
    pub restarts: usize,
    /// Base of every node's training seed.
    pub seed: u64,
}

impl NmfConfig {
    pub fn new(seed: u64) -> Self {
        NmfConfig {
            iters: 1000,
            restarts: 1,
            seed,
        }
    }
}

/// A selected topic per column of `W`, with the factorization trained
/// under that selection.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicSolution {
    pub topics: Vec<usize>,
    pub w: Matrix,
    pub h: Matrix,
    pub loss: f64,
}

/// Binary `n × k` mask: column `i` is the union of the topics still in
/// `D_i`, or all ones while `D_i` is the full database.
pub fn build_mask(domains: &[IntDomain], db: &TopicDb) -> Result<Matrix> {
    let mut mask = Matrix::zeros(db.n_words(), domains.len());
    for (i, d) in domains.iter().enumerate() {
        if d.is_empty() {
            return Err(Error::Contract(format!("topic domain {} is empty", i + 1)));
        }
        let full = d.len() == db.len();
        for word in 0..db.n_words() {
            let on = full || d.iter().any(|j| db.topic(j)[word] != 0.0);
            mask[(word, i)] = if on { 1.0 } else { 0.0 };
        }
    }
    Ok(mask)
}

/// Training seed of a node: depends only on the base seed, the decisions
/// leading to the node and the restart.
pub fn node_seed(base: u64, trail: &[Decision], restart: usize) -> u64 {
    let mut words: Vec<u64> = trail
        .iter()
        .map(|d| match d.value {
            DecisionValue::Assign(v) => ((d.variable as u64) << 32) | v as u64,
            DecisionValue::Fix(b) => ((d.variable as u64) << 32) | b as u64,
        })
        .collect();
    words.push(restart as u64);
    derive_seed(base, &words)
}

/// Topic selection by masked NMF over a prior topic database.
pub struct PriorNmfProblem<'a> {
    instance: &'a NmfInstance,
    table: ExtendedTable,
    config: NmfConfig,
}

impl<'a> PriorNmfProblem<'a> {
    pub fn new(instance: &'a NmfInstance, config: NmfConfig) -> Result<Self> {
        if config.restarts == 0 {
            return Err(Error::Validation("restarts must be at least 1".into()));
        }
        let table = ExtendedTable::new(
            instance.db.n_words(),
            instance.db.topics().to_vec(),
            CostFn::MASKED_L0,
            0.0,
        )?;
        Ok(PriorNmfProblem {
            instance,
            table,
            config,
        })
    }

    pub fn table(&self) -> &ExtendedTable {
        &self.table
    }

    fn train_mask(&self, trail: &[Decision], mask: &Matrix) -> Result<NmfFit> {
        let fits = par::map_indexed(self.config.restarts, |r| {
            let mut rng = Rng::new(node_seed(self.config.seed, trail, r));
            nmf_multiplicative(
                &self.instance.a,
                self.instance.k,
                mask,
                self.config.iters,
                &mut rng,
            )
        });
        let mut best: Option<NmfFit> = None;
        for fit in fits {
            let fit = fit?;
            if best.as_ref().is_none_or(|b| fit.loss < b.loss) {
                best = Some(fit);
            }
        }
        Ok(best.expect("at least one restart"))
    }
}

fn all_assigned_distinct(domains: &[IntDomain]) -> bool {
    let mut seen = Vec::with_capacity(domains.len());
    for d in domains {
        match d.value() {
            Some(v) if !seen.contains(&v) => seen.push(v),
            _ => return false,
        }
    }
    true
}

impl Problem for PriorNmfProblem<'_> {
    type State = Vec<IntDomain>;
    type Generated = Matrix;
    type Model = NmfFit;
    type Solution = TopicSolution;

    fn root_state(&self) -> Vec<IntDomain> {
        vec![IntDomain::full(self.instance.db.len()); self.instance.k]
    }

    fn apply(&self, state: &mut Vec<IntDomain>, decision: &Decision) -> bool {
        match decision.value {
            DecisionValue::Assign(v) => state[decision.variable].assign(v),
            DecisionValue::Fix(_) => false,
        }
    }

    fn prune(&self, state: &mut Vec<IntDomain>) -> bool {
        !alldifferent_filter(state).failed
    }

    fn generate(&self, node: &Node<Vec<IntDomain>>) -> Result<Matrix> {
        build_mask(&node.state, &self.instance.db)
    }

    fn train(&self, node: &Node<Vec<IntDomain>>, mask: &Matrix) -> Result<Trained<NmfFit>> {
        let fit = self.train_mask(&node.trail, mask)?;
        Ok(Trained {
            loss: fit.loss,
            model: fit,
        })
    }

    fn is_leaf(&self, node: &Node<Vec<IntDomain>>, _trained: &Trained<NmfFit>) -> bool {
        all_assigned_distinct(&node.state)
    }

    /// Assigns the lowest-index open column. Candidate topics that survive
    /// all-different filtering are tried closest first, by the L2 norm of
    /// the trained column outside the topic.
    fn branch(
        &self,
        node: &Node<Vec<IntDomain>>,
        trained: &Trained<NmfFit>,
    ) -> Result<Vec<Decision>> {
        let i = node
            .state
            .iter()
            .position(|d| d.value().is_none())
            .ok_or_else(|| {
                Error::Contract("branching on a node with every column assigned".into())
            })?;
        let candidates: Vec<usize> = node.state[i]
            .iter()
            .filter(|&j| {
                let mut s = node.state.clone();
                s[i].assign(j) && !alldifferent_filter(&mut s).failed
            })
            .collect();
        let column = trained.model.w.column(i);
        let ranked = self
            .table
            .rank_tuples(&column, CostFn::MaskedLp { p: 2.0 })?;
        Ok(ranked
            .into_iter()
            .filter(|(j, _)| candidates.contains(j))
            .map(|(j, _)| Decision::assign(i, j, format!("s{}={}", i + 1, j + 1)))
            .collect())
    }

    fn extract(
        &self,
        node: &Node<Vec<IntDomain>>,
        _mask: &Matrix,
        trained: Trained<NmfFit>,
    ) -> TopicSolution {
        TopicSolution {
            topics: node
                .state
                .iter()
                .map(|d| d.value().expect("leaf is assigned"))
                .collect(),
            w: trained.model.w,
            h: trained.model.h,
            loss: trained.loss,
        }
    }
}

/// Trail labels of the node that assigns `topics` column by column.
pub fn assignment_labels(topics: &[usize]) -> Vec<String> {
    topics
        .iter()
        .enumerate()
        .map(|(i, j)| format!("s{}={}", i + 1, j + 1))
        .collect()
}

#[derive(Debug, Clone)]
pub struct NmfRun {
    pub solution: Option<TopicSolution>,
    pub stats: SearchStats,
    /// Share of selected topics that were planted; `None` without ground
    /// truth or solution.
    pub recovery: Option<f64>,
}

pub fn solve_prior_nmf(
    instance: &NmfInstance,
    config: NmfConfig,
    search: &SearchConfig,
) -> Result<NmfRun> {
    solve_prior_nmf_traced(instance, config, search, &mut |_| {})
}

pub fn solve_prior_nmf_traced(
    instance: &NmfInstance,
    config: NmfConfig,
    search: &SearchConfig,
    trace: &mut dyn FnMut(&TraceRecord),
) -> Result<NmfRun> {
    let problem = PriorNmfProblem::new(instance, config)?;
    let outcome = bagel_search_traced(&problem, search, trace)?;
    let solution = outcome.best.map(|b| b.solution);
    let recovery = match (&solution, &instance.planted) {
        (Some(s), Some(p)) => Some(topic_recovery(&s.topics, &p.topics)),
        _ => None,
    };
    Ok(NmfRun {
        solution,
        stats: outcome.stats,
        recovery,
    })
}
