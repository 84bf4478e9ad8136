use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::numerics::{reconstruction_loss, Matrix, Rng, Vector};

/// Prior topics over a fixed vocabulary, each a binary word pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicDb {
    n_words: usize,
    topics: Vec<Vector>,
}

impl TopicDb {
    pub fn new(n_words: usize, topics: Vec<Vec<bool>>) -> Result<Self> {
        for (i, t) in topics.iter().enumerate() {
            ensure_len("topic length", n_words, t.len())?;
            if !t.iter().any(|&b| b) {
                return Err(Error::Validation(format!("topic {} has no words", i + 1)));
            }
            if topics[..i].contains(t) {
                return Err(Error::Validation(format!("topic {} is a duplicate", i + 1)));
            }
        }
        Ok(TopicDb {
            n_words,
            topics: topics
                .into_iter()
                .map(|t| {
                    Vector::from_raw(t.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
                })
                .collect(),
        })
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Topic `j` as a 0/1 vector.
    pub fn topic(&self, j: usize) -> &Vector {
        &self.topics[j]
    }

    pub fn topics(&self) -> &[Vector] {
        &self.topics
    }

    pub fn topic_bits(&self, j: usize) -> Vec<bool> {
        self.topics[j].iter().map(|&v| v != 0.0).collect()
    }
}

/// Ground truth of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    /// Database index of the topic behind each column of `w`.
    pub topics: Vec<usize>,
    pub w: Matrix,
    pub h: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfInstance {
    pub seed: u64,
    /// Words × documents, non-negative.
    pub a: Matrix,
    /// Number of topics to extract.
    pub k: usize,
    pub db: TopicDb,
    pub planted: Option<Planted>,
    pub noise_sigma: f64,
}

impl NmfInstance {
    pub fn new(
        a: Matrix,
        k: usize,
        db: TopicDb,
        planted: Option<Planted>,
        seed: u64,
        noise_sigma: f64,
    ) -> Result<Self> {
        ensure_len("document matrix rows", db.n_words(), a.rows())?;
        if k == 0 {
            return Err(Error::Validation(
                "at least one topic must be extracted".into(),
            ));
        }
        if k > db.len() {
            return Err(Error::Validation(format!(
                "cannot select {k} distinct topics from a database of {}",
                db.len()
            )));
        }
        if a.min_value() < 0.0 {
            return Err(Error::Domain("document matrix has a negative entry".into()));
        }
        if let Some(p) = &planted {
            if p.topics.iter().any(|&t| t >= db.len()) {
                return Err(Error::Validation("planted topic index out of range".into()));
            }
        }
        Ok(NmfInstance {
            seed,
            a,
            k,
            db,
            planted,
            noise_sigma,
        })
    }

    /// `‖A − W* H*‖_F` when the instance has a planted factorization.
    pub fn planted_loss(&self) -> Option<f64> {
        self.planted
            .as_ref()
            .map(|p| reconstruction_loss(&self.a, &p.w, &p.h).expect("planted shapes match"))
    }
}

pub const WORD_GRID: [usize; 6] = [20, 30, 50, 75, 100, 150];
pub const TRUE_TOPIC_GRID: [usize; 5] = [4, 5, 6, 7, 8];
pub const FALSE_TOPIC_GRID: [usize; 4] = [2, 3, 5, 10];
pub const DOC_GRID: [usize; 6] = [50, 100, 150, 200, 250, 300];
pub const MIN_TOPICS_PER_DOC: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfGeneratorParams {
    pub words: usize,
    pub true_topics: usize,
    pub false_topics: usize,
    pub docs: usize,
    /// Fraction of zeros in `W*` and `H*`.
    pub sparsity: f64,
    pub seed: u64,
    /// True topics left out of the database.
    pub novelty: usize,
    /// Noise standard deviation relative to the mean of `W* H*`.
    pub noise_ratio: f64,
}

impl NmfGeneratorParams {
    pub fn new(
        words: usize,
        true_topics: usize,
        false_topics: usize,
        docs: usize,
        seed: u64,
    ) -> Self {
        NmfGeneratorParams {
            words,
            true_topics,
            false_topics,
            docs,
            sparsity: 0.8,
            seed,
            novelty: 0,
            noise_ratio: 0.05,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.noise_ratio = 0.0;
        self
    }

    /// Words per topic: the in-topic share of the vocabulary is
    /// `1 − sparsity`.
    pub fn topic_size(&self) -> usize {
        (((1.0 - self.sparsity) * self.words as f64).round() as usize).clamp(1, self.words)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sparsity > 0.0 && self.sparsity < 1.0) {
            return Err(Error::Validation(format!(
                "sparsity must be in (0, 1), got {}",
                self.sparsity
            )));
        }
        if self.words == 0 || self.docs == 0 {
            return Err(Error::Validation("words and docs must be >= 1".into()));
        }
        if self.true_topics < MIN_TOPICS_PER_DOC {
            return Err(Error::Validation(format!(
                "{} true topics cannot give every document {MIN_TOPICS_PER_DOC} topics",
                self.true_topics
            )));
        }
        if self.novelty > self.false_topics {
            return Err(Error::Validation(format!(
                "novelty {} exceeds false topics {}: not enough database topics to select {}",
                self.novelty, self.false_topics, self.true_topics
            )));
        }
        if !(self.noise_ratio >= 0.0) {
            return Err(Error::Validation("noise ratio must be >= 0".into()));
        }
        let needed = self.true_topics + self.false_topics;
        if !binomial_at_least(self.words, self.topic_size(), needed) {
            return Err(Error::Validation(format!(
                "{needed} distinct topics of {} words do not exist over {} words",
                self.topic_size(),
                self.words
            )));
        }
        if !WORD_GRID.contains(&self.words) {
            log::warn!("word count {} is outside the reference grid", self.words);
        }
        if !TRUE_TOPIC_GRID.contains(&self.true_topics) {
            log::warn!(
                "true topic count {} is outside the reference grid",
                self.true_topics
            );
        }
        if !FALSE_TOPIC_GRID.contains(&self.false_topics) {
            log::warn!(
                "false topic count {} is outside the reference grid",
                self.false_topics
            );
        }
        if !DOC_GRID.contains(&self.docs) {
            log::warn!("document count {} is outside the reference grid", self.docs);
        }
        Ok(())
    }
}

/// Whether `C(n, r) >= needed`, without overflow.
fn binomial_at_least(n: usize, r: usize, needed: usize) -> bool {
    let mut c: u128 = 1;
    for i in 0..r as u128 {
        c = c * (n as u128 - i) / (i + 1);
        if c >= needed as u128 {
            return true;
        }
    }
    c >= needed as u128
}

/// Deterministic planted instance.
///
/// Topics are distinct random word sets of [`NmfGeneratorParams::topic_size`]
/// words. Column `i` of `W*` puts a weight uniform in `[0.5, 1.5]` on every
/// word of true topic `i`. Each entry of `H*` is active with probability
/// `1 − sparsity` (weight uniform in `[0.5, 1.5]`), topped up to at least
/// two active topics per document. `A = max(0, W* H* + ε)` with
/// `σ = noise_ratio · mean(W* H*)`. The database holds the true topics
/// (minus the first `novelty` ones) and the false topics, shuffled.
pub fn generate_nmf_instance(params: &NmfGeneratorParams) -> Result<NmfInstance> {
    params.validate()?;
    let mut rng = Rng::new(params.seed);
    let (n, m, kt) = (params.words, params.docs, params.true_topics);
    let size = params.topic_size();

    let mut topics: Vec<Vec<bool>> = Vec::with_capacity(kt + params.false_topics);
    while topics.len() < kt + params.false_topics {
        let mut t = vec![false; n];
        for w in rng.sample_indices(n, size) {
            t[w] = true;
        }
        if !topics.contains(&t) {
            topics.push(t);
        }
    }

    let w_star = Matrix::from_fn(n, kt, |i, j| {
        if topics[j][i] {
            rng.uniform(0.5, 1.5)
        } else {
            0.0
        }
    });
    let mut h_star = Matrix::zeros(kt, m);
    for doc in 0..m {
        let mut active: Vec<usize> = (0..kt)
            .filter(|_| rng.bernoulli(1.0 - params.sparsity))
            .collect();
        if active.len() < MIN_TOPICS_PER_DOC {
            let mut rest: Vec<usize> = (0..kt).filter(|t| !active.contains(t)).collect();
            rng.shuffle(&mut rest);
            active.extend(rest.into_iter().take(MIN_TOPICS_PER_DOC - active.len()));
        }
        for t in active {
            h_star[(t, doc)] = rng.uniform(0.5, 1.5);
        }
    }

    let clean = w_star.matmul(&h_star)?;
    let mean = clean.as_slice().iter().sum::<f64>() / (n * m) as f64;
    let sigma = params.noise_ratio * mean;
    let a = if sigma > 0.0 {
        Matrix::from_fn(n, m, |i, j| {
            (clean[(i, j)] + rng.normal(0.0, sigma)).max(0.0)
        })
    } else {
        clean
    };

    // database: true topics minus the novel ones, then the false ones, shuffled
    let mut entries: Vec<(Option<usize>, Vec<bool>)> = topics
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i >= params.novelty)
        .map(|(i, t)| ((i < kt).then_some(i), t))
        .collect();
    rng.shuffle(&mut entries);
    let mut planted_topics = vec![usize::MAX; kt];
    for (pos, (origin, _)) in entries.iter().enumerate() {
        if let Some(col) = origin {
            planted_topics[*col] = pos;
        }
    }
    let planted = Planted {
        topics: (params.novelty..kt).map(|c| planted_topics[c]).collect(),
        w: w_star,
        h: h_star,
    };
    let db = TopicDb::new(n, entries.into_iter().map(|(_, t)| t).collect())?;
    NmfInstance::new(a, kt, db, Some(planted), params.seed, sigma)
}

/// Share of the selected topics that are planted topics.
pub fn topic_recovery(selected: &[usize], planted: &[usize]) -> f64 {
    if selected.is_empty() {
        return 0.0;
    }
    let hits = selected.iter().filter(|s| planted.contains(s)).count();
    hits as f64 / selected.len() as f64
}
