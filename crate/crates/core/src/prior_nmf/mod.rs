//! Topic modelling with prior topics.
//!
//! Each column of `W` must match, on its support, one topic of a binary
//! topic database, and distinct columns must match distinct topics.

mod instance;
mod problem;

pub use instance::{
    generate_nmf_instance, topic_recovery, NmfGeneratorParams, NmfInstance, Planted, TopicDb,
    DOC_GRID, FALSE_TOPIC_GRID, MIN_TOPICS_PER_DOC, TRUE_TOPIC_GRID, WORD_GRID,
};
pub use problem::{
    assignment_labels, build_mask, node_seed, solve_prior_nmf, solve_prior_nmf_traced, NmfConfig,
    NmfRun, PriorNmfProblem, TopicSolution,
};
