use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::constraints::BudgetConstraint;
use crate::error::{ensure_len, Error, Result};
use crate::numerics::{derive_seed, Matrix, Rng, Vector};

/// An input component: `size` consecutive features sharing one activation
/// variable and one cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub size: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmartDesignInstance {
    pub seed: u64,
    pub x: Matrix,
    pub y: Vector,
    pub components: Vec<Component>,
    pub bound: f64,
    /// `Σ u_i w_i < B` when set, `≤ B` otherwise.
    pub strict: bool,
    pub noise_sigma: f64,
    offsets: Vec<Range<usize>>,
}

impl SmartDesignInstance {
    pub fn new(
        x: Matrix,
        y: Vector,
        components: Vec<Component>,
        bound: f64,
        strict: bool,
        seed: u64,
        noise_sigma: f64,
    ) -> Result<Self> {
        ensure_len("targets", x.rows(), y.len())?;
        if components.is_empty() {
            return Err(Error::Validation("instance has no components".into()));
        }
        if let Some(c) = components.iter().find(|c| c.size == 0) {
            return Err(Error::Validation(format!(
                "component size must be >= 1, got {}",
                c.size
            )));
        }
        let d: usize = components.iter().map(|c| c.size).sum();
        ensure_len("sum of component sizes", x.cols(), d)?;
        // validates weights and bound
        BudgetConstraint::new(components.iter().map(|c| c.weight).collect(), bound, strict)?;
        let mut offsets = Vec::with_capacity(components.len());
        let mut start = 0;
        for c in &components {
            offsets.push(start..start + c.size);
            start += c.size;
        }
        Ok(SmartDesignInstance {
            seed,
            x,
            y,
            components,
            bound,
            strict,
            noise_sigma,
            offsets,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn samples(&self) -> usize {
        self.x.rows()
    }

    pub fn features(&self) -> usize {
        self.x.cols()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn budget(&self) -> BudgetConstraint {
        BudgetConstraint::new(self.weights(), self.bound, self.strict)
            .expect("validated at construction")
    }

    /// Feature indices of component `i`.
    pub fn feature_range(&self, i: usize) -> Range<usize> {
        self.offsets[i].clone()
    }

    /// Component owning each feature.
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.features()];
        for (i, r) in self.offsets.iter().enumerate() {
            owner[r.clone()].fill(i);
        }
        owner
    }

    /// Feature mask of an activation vector.
    pub fn expand(&self, u: &[bool]) -> Vec<bool> {
        let mut mask = vec![false; self.features()];
        for (r, &on) in self.offsets.iter().zip(u) {
            mask[r.clone()].fill(on);
        }
        mask
    }

    /// Same components and budget, restricted to a subset of the samples.
    pub fn with_rows(&self, rows: &[usize]) -> SmartDesignInstance {
        SmartDesignInstance {
            x: self.x.select_rows(rows),
            y: Vector::from_raw(rows.iter().map(|&r| self.y[r]).collect()),
            offsets: self.offsets.clone(),
            components: self.components.clone(),
            ..*self
        }
    }
}

pub const FEATURE_GRID: [usize; 13] = [10, 20, 40, 70, 100, 130, 150, 180, 200, 225, 250, 300, 350];
pub const SAMPLE_GRID: [usize; 8] = [100, 400, 700, 1000, 1500, 3000, 7000, 10000];
pub const COST_GRID: [f64; 4] = [0.90, 0.80, 0.60, 0.30];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub features: usize,
    pub samples: usize,
    pub cost_percent: f64,
    pub seed: u64,
    /// Number of components; defaults to `min(10, 2 + features / 5)`.
    pub components: Option<usize>,
    /// Noise standard deviation relative to the standard deviation of the
    /// noiseless targets.
    pub noise_ratio: f64,
}

impl GeneratorParams {
    pub fn new(features: usize, samples: usize, cost_percent: f64, seed: u64) -> Self {
        GeneratorParams {
            features,
            samples,
            cost_percent,
            seed,
            components: None,
            noise_ratio: 0.1,
        }
    }

    pub fn component_count(&self) -> usize {
        self.components
            .unwrap_or_else(|| (2 + self.features / 5).min(10))
            .min(self.features)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cost_percent > 0.0 && self.cost_percent <= 1.0) {
            return Err(Error::Validation(format!(
                "cost percent must be in (0, 1], got {}",
                self.cost_percent
            )));
        }
        if self.features == 0 || self.samples == 0 {
            return Err(Error::Validation(
                "features and samples must be >= 1".into(),
            ));
        }
        let k = self.component_count();
        if k == 0 || k > crate::constraints::MAX_ENUMERATED_COMPONENTS {
            return Err(Error::Validation(format!(
                "component count {k} out of range"
            )));
        }
        if !(self.noise_ratio >= 0.0) {
            return Err(Error::Validation("noise ratio must be >= 0".into()));
        }
        if !FEATURE_GRID.contains(&self.features) {
            log::warn!(
                "feature count {} is outside the reference grid",
                self.features
            );
        }
        if !SAMPLE_GRID.contains(&self.samples) {
            log::warn!(
                "sample count {} is outside the reference grid",
                self.samples
            );
        }
        if !COST_GRID.contains(&self.cost_percent) {
            log::warn!(
                "cost percent {} is outside the reference grid",
                self.cost_percent
            );
        }
        Ok(())
    }
}

/// A generated instance together with its planted ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedDesign {
    pub instance: SmartDesignInstance,
    pub planted_u: Vec<bool>,
    pub planted_theta: Vector,
}

/// Deterministic synthetic instance.
///
/// Component sizes are uniform draws normalized to sum to `features` (each
/// at least 1), weights are uniform in `[1, 10]` and the bound is
/// `cost_percent · Σ w`. The planted model is supported on a random
/// budget-feasible set of components (components taken in random order,
/// kept while the budget allows), with standard normal coefficients.
/// `X` is standard normal and `y = X θ* + ε`, `ε ~ N(0, σ²)` with
/// `σ = noise_ratio · std(X θ*)` (`noise_ratio` itself when the planted
/// signal is identically zero).
pub fn generate_instance(params: &GeneratorParams) -> Result<GeneratedDesign> {
    params.validate()?;
    let mut rng = Rng::new(params.seed);
    let n = params.features;
    let k = params.component_count();

    let sizes = partition_sizes(&mut rng, n, k);
    let weights: Vec<f64> = (0..k).map(|_| rng.uniform(1.0, 10.0)).collect();
    let total: f64 = weights.iter().sum();
    let bound = params.cost_percent * total;
    let components: Vec<Component> = sizes
        .iter()
        .zip(&weights)
        .map(|(&size, &weight)| Component { size, weight })
        .collect();

    let x = Matrix::from_fn(params.samples, n, |_, _| rng.normal(0.0, 1.0));

    let mut planted_u = vec![false; k];
    let mut used = 0.0;
    for i in rng.permutation(k) {
        if used + weights[i] < bound {
            planted_u[i] = true;
            used += weights[i];
        }
    }
    let mut theta = vec![0.0; n];
    let mut start = 0;
    for (c, &on) in components.iter().zip(&planted_u) {
        for t in &mut theta[start..start + c.size] {
            if on {
                *t = rng.normal(0.0, 1.0);
            }
        }
        start += c.size;
    }

    let signal = x.mul_vec(&theta)?;
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let std = (signal.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / signal.len() as f64).sqrt();
    let sigma = if std > 0.0 {
        params.noise_ratio * std
    } else {
        params.noise_ratio
    };
    let y: Vec<f64> = signal.iter().map(|s| s + rng.normal(0.0, sigma)).collect();

    let instance = SmartDesignInstance::new(
        x,
        Vector::new(y)?,
        components,
        bound,
        true,
        params.seed,
        sigma,
    )?;
    Ok(GeneratedDesign {
        instance,
        planted_u,
        planted_theta: Vector::new(theta)?,
    })
}

/// `k` positive sizes summing to `n`, proportional to uniform draws, with
/// the rounding remainder given to the largest fractional parts.
fn partition_sizes(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    let draws: Vec<f64> = (0..k).map(|_| rng.next_f64_open_closed()).collect();
    let sum: f64 = draws.iter().sum();
    let extra = (n - k) as f64;
    let raw: Vec<f64> = draws.iter().map(|d| d / sum * extra).collect();
    let mut sizes: Vec<usize> = raw.iter().map(|r| 1 + r.floor() as usize).collect();
    let mut remaining = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        sizes[i] += 1;
        remaining -= 1;
    }
    sizes
}

pub const FOLDS: usize = 5;

/// `(train rows, test rows)` of cross-validation fold `fold` out of
/// `folds`, over a seeded permutation of the samples. Every sample is in
/// exactly one test fold.
pub fn fold_split(
    samples: usize,
    folds: usize,
    fold: usize,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    assert!(fold < folds && folds > 0);
    let perm = Rng::new(derive_seed(seed, &[0xf01d])).permutation(samples);
    let lo = fold * samples / folds;
    let hi = (fold + 1) * samples / folds;
    let mut test = perm[lo..hi].to_vec();
    let mut train: Vec<usize> = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}
