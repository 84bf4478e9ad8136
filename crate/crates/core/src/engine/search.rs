use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::node::{Node, NodeStatus};
use super::Problem;
use crate::Result;

/// A child whose trained loss is below its parent's by more than this is
/// reported as a monotonic-restriction warning.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub wall_clock: Option<Duration>,
    pub node_budget: Option<usize>,
}

impl StopCondition {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn nodes(limit: usize) -> Self {
        StopCondition {
            node_budget: Some(limit),
            ..Self::default()
        }
    }

    pub fn wall_clock(limit: Duration) -> Self {
        StopCondition {
            wall_clock: Some(limit),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Children explored in branching order, backtracking to the most
    /// recent open sibling.
    #[default]
    DepthFirst,
    /// Lowest parent loss first; ties go to the older node.
    BestFirst,
}

/// How the incumbent bound is used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pruning {
    /// Prune on trained losses, which are certified lower bounds.
    #[default]
    Exact,
    /// Prune on trained losses although training is approximate.
    Heuristic,
    /// Never bound-prune; only leaves stop the descent.
    Off,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub stop: StopCondition,
    pub strategy: Strategy,
    pub pruning: Pruning,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_opened: usize,
    pub nodes_pruned: usize,
    pub nodes_failed: usize,
    pub leaves: usize,
    pub max_depth: usize,
    pub wall_time: Duration,
    /// `true` when the frontier was exhausted, `false` when stopped.
    pub completed: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundDecision {
    Keep,
    Prune,
}

/// A node whose loss is no better than the incumbent's cannot lead to a
/// better leaf.
pub fn bound_prune(node_loss: f64, incumbent_loss: Option<f64>) -> BoundDecision {
    match incumbent_loss {
        Some(best) if node_loss >= best => BoundDecision::Prune,
        _ => BoundDecision::Keep,
    }
}

pub fn should_stop(stats: &SearchStats, stop: &StopCondition) -> bool {
    stop.wall_clock
        .is_some_and(|limit| stats.wall_time >= limit)
        || stop
            .node_budget
            .is_some_and(|limit| stats.nodes_opened >= limit)
}

#[derive(Debug, Clone)]
pub struct Incumbent<Sol> {
    pub node_id: usize,
    pub loss: f64,
    pub solution: Sol,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<Sol> {
    pub best: Option<Incumbent<Sol>>,
    pub stats: SearchStats,
    /// `(node id, loss)` for every incumbent improvement, in order.
    pub incumbent_history: Vec<(usize, f64)>,
}

/// One line of the node trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: usize,
    pub depth: usize,
    pub trail: Vec<String>,
    pub loss: Option<f64>,
    pub status: NodeStatus,
}

/// Writes trace records as newline-delimited JSON. The first write error is
/// kept and later records are dropped.
pub struct JsonLinesTrace<W: Write> {
    writer: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonLinesTrace<W> {
    pub fn new(writer: W) -> Self {
        JsonLinesTrace {
            writer,
            error: None,
        }
    }

    pub fn record(&mut self, rec: &TraceRecord) {
        if self.error.is_some() {
            return;
        }
        let line = serde_json::to_string(rec).expect("trace record serializes");
        if let Err(e) = writeln!(self.writer, "{line}") {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

struct Queued<S> {
    priority: f64,
    node: Node<S>,
}

impl<S> PartialEq for Queued<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S> Eq for Queued<S> {}

impl<S> PartialOrd for Queued<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S> Ord for Queued<S> {
    // BinaryHeap is a max-heap: invert so the lowest loss, then lowest id,
    // comes out first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.node.id.cmp(&self.node.id))
    }
}

enum Frontier<S> {
    Stack(Vec<Node<S>>),
    Heap(BinaryHeap<Queued<S>>),
}

impl<S> Frontier<S> {
    fn new(strategy: Strategy) -> Self {
        match strategy {
            Strategy::DepthFirst => Frontier::Stack(Vec::new()),
            Strategy::BestFirst => Frontier::Heap(BinaryHeap::new()),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Frontier::Stack(s) => s.is_empty(),
            Frontier::Heap(h) => h.is_empty(),
        }
    }

    fn pop(&mut self) -> Option<Node<S>> {
        match self {
            Frontier::Stack(s) => s.pop(),
            Frontier::Heap(h) => h.pop().map(|q| q.node),
        }
    }

    /// Pushes children given in exploration order.
    fn push_children(&mut self, children: Vec<Node<S>>) {
        match self {
            Frontier::Stack(s) => s.extend(children.into_iter().rev()),
            Frontier::Heap(h) => h.extend(children.into_iter().map(|node| Queued {
                priority: node.parent_loss.unwrap_or(f64::NEG_INFINITY),
                node,
            })),
        }
    }
}

pub fn bagel_search<P: Problem>(
    problem: &P,
    config: &SearchConfig,
) -> Result<SearchOutcome<P::Solution>> {
    bagel_search_traced(problem, config, &mut |_| {})
}

/// Runs the search, calling `trace` once per node when its status is final.
pub fn bagel_search_traced<P: Problem>(
    problem: &P,
    config: &SearchConfig,
    trace: &mut dyn FnMut(&TraceRecord),
) -> Result<SearchOutcome<P::Solution>> {
    let start = Instant::now();
    let mut stats = SearchStats::default();
    if config.pruning == Pruning::Exact && !problem.exact_training() {
        stats
            .warnings
            .push("exact pruning requested but training is approximate".into());
    }

    let mut best: Option<Incumbent<P::Solution>> = None;
    let mut history = Vec::new();
    let mut frontier = Frontier::new(config.strategy);
    frontier.push_children(vec![Node::root(problem.root_state())]);
    let mut next_id = 1;

    let emit = |trace: &mut dyn FnMut(&TraceRecord), node: &Node<P::State>| {
        trace(&TraceRecord {
            id: node.id,
            depth: node.depth,
            trail: node.trail_labels(),
            loss: node.loss,
            status: node.status,
        })
    };

    loop {
        stats.wall_time = start.elapsed();
        if frontier.is_empty() || should_stop(&stats, &config.stop) {
            break;
        }
        let mut node = frontier.pop().expect("frontier is not empty");
        stats.nodes_opened += 1;
        stats.max_depth = stats.max_depth.max(node.depth);

        if !problem.prune(&mut node.state) {
            node.status = NodeStatus::Failed;
            stats.nodes_failed += 1;
            emit(trace, &node);
            continue;
        }

        let generated = problem.generate(&node)?;
        let trained = problem.train(&node, &generated)?;
        node.loss = Some(trained.loss);
        node.status = NodeStatus::Trained;

        if let Some(parent) = node.parent_loss {
            if trained.loss < parent - MONOTONICITY_TOLERANCE {
                stats.warnings.push(format!(
                    "node {} loss {} is below its parent's {}",
                    node.id, trained.loss, parent
                ));
            }
        }

        if config.pruning != Pruning::Off
            && bound_prune(trained.loss, best.as_ref().map(|b| b.loss)) == BoundDecision::Prune
        {
            node.status = NodeStatus::Pruned;
            stats.nodes_pruned += 1;
            emit(trace, &node);
            continue;
        }

        if problem.is_leaf(&node, &trained) {
            node.status = NodeStatus::Leaf;
            stats.leaves += 1;
            emit(trace, &node);
            // first leaf wins ties
            if best.as_ref().is_none_or(|b| trained.loss < b.loss) {
                history.push((node.id, trained.loss));
                let loss = trained.loss;
                best = Some(Incumbent {
                    node_id: node.id,
                    loss,
                    solution: problem.extract(&node, &generated, trained),
                });
            }
            continue;
        }

        let decisions = problem.branch(&node, &trained)?;
        emit(trace, &node);
        let mut children = Vec::with_capacity(decisions.len());
        for decision in decisions {
            let mut state = node.state.clone();
            let id = next_id;
            next_id += 1;
            let mut trail = node.trail.clone();
            let applied = problem.apply(&mut state, &decision);
            trail.push(decision);
            let child = Node {
                id,
                depth: node.depth + 1,
                trail,
                state,
                loss: None,
                status: if applied {
                    NodeStatus::Open
                } else {
                    NodeStatus::Failed
                },
                parent_loss: Some(trained.loss),
            };
            if applied {
                children.push(child);
            } else {
                stats.nodes_failed += 1;
                emit(trace, &child);
            }
        }
        frontier.push_children(children);
    }

    stats.completed = frontier.is_empty();
    stats.wall_time = start.elapsed();
    Ok(SearchOutcome {
        best,
        stats,
        incumbent_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_pruning_is_inclusive() {
        assert_eq!(bound_prune(0.22, Some(0.21)), BoundDecision::Prune);
        assert_eq!(bound_prune(0.14, None), BoundDecision::Keep);
        assert_eq!(bound_prune(0.21, Some(0.21)), BoundDecision::Prune);
        assert_eq!(bound_prune(0.19, Some(0.21)), BoundDecision::Keep);
    }

    #[test]
    fn stop_conditions() {
        let mut stats = SearchStats::default();
        assert!(!should_stop(&stats, &StopCondition::unbounded()));
        stats.nodes_opened = 100;
        stats.wall_time = Duration::from_secs(10_000);
        assert!(!should_stop(&stats, &StopCondition::unbounded()));
        assert!(should_stop(&stats, &StopCondition::nodes(100)));
        assert!(!should_stop(&stats, &StopCondition::nodes(101)));
        stats.wall_time = Duration::from_secs(601);
        assert!(should_stop(
            &stats,
            &StopCondition::wall_clock(Duration::from_secs(600))
        ));
        stats.wall_time = Duration::from_secs(599);
        assert!(!should_stop(
            &stats,
            &StopCondition::wall_clock(Duration::from_secs(600))
        ));
    }

    #[test]
    fn trace_lines_are_json() {
        let mut t = JsonLinesTrace::new(Vec::new());
        t.record(&TraceRecord {
            id: 3,
            depth: 2,
            trail: vec!["u1=0".into(), "u2=0".into()],
            loss: Some(0.21),
            status: NodeStatus::Leaf,
        });
        let out = String::from_utf8(t.finish().unwrap()).unwrap();
        assert_eq!(
            out,
            "{\"id\":3,\"depth\":2,\"trail\":[\"u1=0\",\"u2=0\"],\"loss\":0.21,\"status\":\"LEAF\"}\n"
        );
    }
}
